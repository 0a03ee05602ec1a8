#include <benchmark/benchmark.h>

#include <random>

#include "stlsynth/de.hpp"
#include "stlsynth/gp.hpp"
#include "stlsynth/problem.hpp"
#include "stlsynth/stl.hpp"
#include "stlsynth/system.hpp"
#include "stlsynth/ucb.hpp"

using namespace stlsynth;

namespace {

Trace case_study_trace(int time_bound) {
  const SystemModel di = SystemModel::double_integrator(-2.0, 2.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::VectorXd> inputs;
  for (int t = 0; t <= time_bound; ++t) {
    inputs.push_back(Eigen::Vector2d(u(rng), u(rng)));
  }
  return rollout(di, ControlSequence(inputs, di.input_lower(), di.input_upper()));
}

Formula case_study_spec(int time_bound) {
  const CaseStudyGeometry geometry{{2.9, 5.2, 2.9, 5.2},
                                   {0.3, 2.0, 2.2, 4.2},
                                   {2.2, 4.2, 0.3, 2.0},
                                   {2.1, 2.8, 2.1, 2.8},
                                   std::nullopt};
  return build_reach_avoid_spec(geometry, time_bound, -2.0, 2.0);
}

GaussianProcess gp_with(int observations, int dim) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  GaussianProcess gp(KernelParams{1.0, 2.0, 1e-4});
  for (int i = 0; i < observations; ++i) {
    Eigen::VectorXd x(dim);
    for (int k = 0; k < dim; ++k) x[k] = coord(rng);
    gp = gp.with_observation(x, std::sin(x.sum()));
  }
  return gp;
}

void BM_RobustnessReference(benchmark::State& state) {
  const Formula phi = parse_formula("G[0,3] ((y0 > 3) and (not (y0 > 6)))", 1);
  const Trace tr = Trace::from_scalars({4, 4, 5, 5, 7});
  for (auto _ : state) {
    benchmark::DoNotOptimize(robustness(phi, tr, 0));
  }
}
BENCHMARK(BM_RobustnessReference);

void BM_RobustnessReachAvoid(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const Formula phi = case_study_spec(T);
  const Trace tr = case_study_trace(T);
  for (auto _ : state) {
    benchmark::DoNotOptimize(robustness(phi, tr, 0));
  }
}
BENCHMARK(BM_RobustnessReachAvoid)->Arg(10)->Arg(25)->Arg(50);

void BM_Rollout(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const SystemModel di = SystemModel::double_integrator(-2.0, 2.0);
  std::vector<Eigen::VectorXd> inputs(static_cast<std::size_t>(T + 1),
                                      Eigen::Vector2d(0.1, -0.1));
  const ControlSequence seq(inputs, di.input_lower(), di.input_upper());
  for (auto _ : state) {
    benchmark::DoNotOptimize(rollout(di, seq));
  }
}
BENCHMARK(BM_Rollout)->Arg(10)->Arg(25);

void BM_GpPosterior(benchmark::State& state) {
  const GaussianProcess gp = gp_with(static_cast<int>(state.range(0)), 22);
  const Eigen::VectorXd query = Eigen::VectorXd::Constant(22, 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gp.posterior(query));
  }
}
BENCHMARK(BM_GpPosterior)->Arg(50)->Arg(100)->Arg(200);

void BM_GpUpdate(benchmark::State& state) {
  const GaussianProcess gp = gp_with(static_cast<int>(state.range(0)), 22);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(22, -0.2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gp.with_observation(x, 0.5));
  }
}
BENCHMARK(BM_GpUpdate)->Arg(50)->Arg(100)->Arg(200);

void BM_UcbAcquire(benchmark::State& state) {
  const GaussianProcess gp = gp_with(50, 22);
  const Box box{Eigen::VectorXd::Constant(22, -2.0),
                Eigen::VectorXd::Constant(22, 2.0)};
  std::mt19937_64 rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ucb_acquire(gp, 0.5, box, AcquisitionBudget{}, rng));
  }
}
BENCHMARK(BM_UcbAcquire);

void BM_DeGeneration(benchmark::State& state) {
  const Box box{Eigen::VectorXd::Constant(22, -2.0),
                Eigen::VectorXd::Constant(22, 2.0)};
  DeConfig cfg;
  cfg.population = 30;
  cfg.generations = 1;
  for (auto _ : state) {
    cfg.seed += 1;
    benchmark::DoNotOptimize(
        de_minimize([](const Eigen::VectorXd& x) { return x.squaredNorm(); }, box,
                    cfg));
  }
}
BENCHMARK(BM_DeGeneration);

} // namespace

BENCHMARK_MAIN();
