#include "stlsynth/problem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace stlsynth {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double median(std::vector<double> values) {
  if (values.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Formula axis_above(int index, double bound, int dimension) {
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(dimension);
  coeffs[index] = 1.0;
  return Formula::predicate(std::move(coeffs), bound);
}

Formula axis_below(int index, double bound, int dimension) {
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(dimension);
  coeffs[index] = -1.0;
  return Formula::predicate(std::move(coeffs), -bound);
}

void check_region(const Region& r, const char* name) {
  if (!(r.x_lo < r.x_hi) || !(r.y_lo < r.y_hi)) {
    throw std::invalid_argument(std::string("region '") + name +
                                "' must have x_lo < x_hi and y_lo < y_hi");
  }
}

} // namespace

Formula region_membership(const Region& region, int x_index, int y_index,
                          int dimension) {
  check_region(region, "membership");
  return Formula::conjunction(
      Formula::conjunction(axis_above(x_index, region.x_lo, dimension),
                           axis_below(x_index, region.x_hi, dimension)),
      Formula::conjunction(axis_above(y_index, region.y_lo, dimension),
                           axis_below(y_index, region.y_hi, dimension)));
}

Formula region_avoidance(const Region& region, int x_index, int y_index,
                         int dimension) {
  check_region(region, "avoidance");
  return Formula::disjunction(
      Formula::disjunction(axis_below(x_index, region.x_lo, dimension),
                           axis_above(x_index, region.x_hi, dimension)),
      Formula::disjunction(axis_below(y_index, region.y_lo, dimension),
                           axis_above(y_index, region.y_hi, dimension)));
}

Formula build_reach_avoid_spec(const CaseStudyGeometry& geometry, int time_bound,
                               double fallback_u_min, double fallback_u_max) {
  if (time_bound < 1) {
    throw std::invalid_argument("case-study time bound must be >= 1");
  }
  const auto [u_min, u_max] =
      geometry.control_bound.value_or(std::make_pair(fallback_u_min, fallback_u_max));
  if (!(u_min < u_max)) {
    throw std::invalid_argument("case-study input bounds must satisfy u_min < u_max");
  }
  check_region(geometry.goal, "goal");
  check_region(geometry.waypoint1, "waypoint1");
  check_region(geometry.waypoint2, "waypoint2");
  check_region(geometry.obstacle, "obstacle");

  const int p = 4;
  Formula waypoints = Formula::disjunction(
      region_membership(geometry.waypoint1, 0, 1, p),
      region_membership(geometry.waypoint2, 0, 1, p));
  Formula control_bounded = Formula::conjunction(
      Formula::conjunction(axis_above(2, u_min, p), axis_below(2, u_max, p)),
      Formula::conjunction(axis_above(3, u_min, p), axis_below(3, u_max, p)));

  return Formula::conjunction(
      Formula::conjunction(
          Formula::eventually(std::move(waypoints), 0, time_bound),
          Formula::eventually(region_membership(geometry.goal, 0, 1, p), 0,
                              time_bound)),
      Formula::conjunction(
          Formula::always(region_avoidance(geometry.obstacle, 0, 1, p), 0,
                          time_bound),
          Formula::always(std::move(control_bounded), 0, time_bound)));
}

// ---------------------------------------------------------------------------
// Pipelines

const char* to_string(Pipeline pipeline) {
  switch (pipeline) {
  case Pipeline::DeOnly: return "de_only";
  case Pipeline::BoOnly: return "bo_only";
  case Pipeline::DeBo: return "de_bo";
  }
  return "unknown";
}

Pipeline pipeline_from_string(const std::string& name) {
  if (name == "de_only") return Pipeline::DeOnly;
  if (name == "bo_only") return Pipeline::BoOnly;
  if (name == "de_bo") return Pipeline::DeBo;
  throw std::invalid_argument("unknown pipeline '" + name +
                              "' (expected de_only, bo_only or de_bo)");
}

namespace {

std::vector<ControlSequence> random_controls(const SystemModel& model, int length,
                                             int count, std::uint64_t seed) {
  const Box box = control_box(model, length);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ControlSequence> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd flat(box.dim());
    for (int j = 0; j < box.dim(); ++j) {
      flat[j] = box.lower[j] + unit(rng) * (box.upper[j] - box.lower[j]);
    }
    out.push_back(ControlSequence::from_flat(flat, model.input_dim(),
                                             model.input_lower(),
                                             model.input_upper()));
  }
  return out;
}

SynthesisResult result_from_de(const SystemModel& model, const DeResult& de,
                               double rho_min) {
  if (de.members.empty()) {
    throw std::logic_error("DE returned no members");
  }
  auto to_sequence = [&](const Eigen::VectorXd& flat) {
    return ControlSequence::from_flat(flat, model.input_dim(), model.input_lower(),
                                      model.input_upper());
  };
  SynthesisResult result{SynthesisStatus::InfeasibleBudget,
                         to_sequence(de.members.front().point),
                         de.members.front().cost,
                         -de.members.front().cost,
                         {},
                         de.evaluations};
  for (const auto& member : de.members) {
    result.log.push_back(IterationRecord{0, member.point, member.cost,
                                         -member.cost, 0.0, 0.0, 0.0, 0.0, 0});
  }
  if (result.best_cost <= -rho_min) {
    result.status = SynthesisStatus::Satisfied;
  }
  return result;
}

} // namespace

RunRecord run_pipeline(const ProblemConfig& problem, Pipeline pipeline,
                       std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t stream = seed;
  const std::uint64_t de_seed = splitmix64(stream);
  const std::uint64_t init_seed = splitmix64(stream);
  const std::uint64_t bo_seed = splitmix64(stream);

  const int length = problem.horizon + 1;

  DeConfig de_cfg = problem.de;
  de_cfg.seed = de_seed;
  UcbConfig bo_cfg = problem.bo;
  bo_cfg.seed = bo_seed;
  bo_cfg.rho_min = problem.rho_min;

  SynthesisResult result = [&] {
    switch (pipeline) {
    case Pipeline::DeOnly: {
      const DeResult de = de_minimize(
          objective_on_flat(problem.model, problem.spec, length),
          control_box(problem.model, length), de_cfg);
      return result_from_de(problem.model, de, problem.rho_min);
    }
    case Pipeline::BoOnly: {
      const auto init = random_controls(problem.model, length,
                                        std::max(1, problem.bo_init_points),
                                        init_seed);
      return synthesize(problem.model, problem.spec, bo_cfg, init);
    }
    case Pipeline::DeBo: {
      const auto seeds =
          de_seed_synthesis(problem.model, problem.spec, de_cfg, length);
      return synthesize(problem.model, problem.spec, bo_cfg, seeds);
    }
    }
    throw std::logic_error("unreachable pipeline");
  }();

  Trace trace = rollout(problem.model, result.best_input);

  // Soundness audit: never report satisfied without Boolean confirmation.
  if (result.status == SynthesisStatus::Satisfied &&
      !eval_boolean(problem.spec, trace, 0)) {
    throw std::logic_error("soundness violation: result marked satisfied but "
                           "the trace fails the specification");
  }

  const double wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  return RunRecord{pipeline, seed, std::move(result), std::move(trace), wall_ms};
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) {
    throw std::runtime_error("expected a JSON array of numbers");
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) {
    throw std::runtime_error("expected a JSON array of rows");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) {
      throw std::runtime_error("matrix rows have inconsistent lengths");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          j[r][c].get<double>();
    }
  }
  return m;
}

OutputComponent output_component_from_string(const std::string& text) {
  if (text.size() < 2 || (text[0] != 'x' && text[0] != 'u')) {
    throw std::runtime_error("output selector '" + text +
                             "' must look like x<k> or u<k>");
  }
  const int index = std::stoi(text.substr(1));
  return OutputComponent{
      text[0] == 'x' ? OutputSource::State : OutputSource::Input, index};
}

SystemModel system_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "double_integrator") {
    SystemModel model = SystemModel::double_integrator(
        j.at("u_min").get<double>(), j.at("u_max").get<double>());
    if (j.contains("x0")) {
      model = model.with_initial_state(vector_from_json(j.at("x0")));
    }
    return model;
  }
  if (kind == "lti") {
    Eigen::MatrixXd A = matrix_from_json(j.at("A"));
    Eigen::MatrixXd B = matrix_from_json(j.at("B"));
    std::vector<OutputComponent> output_map;
    for (const auto& entry : j.at("output")) {
      output_map.push_back(output_component_from_string(entry.get<std::string>()));
    }
    const int m = static_cast<int>(B.cols());
    auto bound_vector = [m](const json& bound) {
      return bound.is_number()
                 ? Eigen::VectorXd::Constant(m, bound.get<double>()).eval()
                 : vector_from_json(bound);
    };
    Eigen::VectorXd x0 = j.contains("x0")
                             ? vector_from_json(j.at("x0"))
                             : Eigen::VectorXd::Zero(A.rows()).eval();
    return SystemModel::lti(std::move(A), std::move(B), std::move(output_map),
                            bound_vector(j.at("u_min")), bound_vector(j.at("u_max")),
                            std::move(x0));
  }
  throw std::runtime_error("unknown system kind '" + kind +
                           "' (expected double_integrator or lti)");
}

Region region_from_json(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 4) {
    throw std::runtime_error(std::string("region '") + name +
                             "' must be [x_lo, x_hi, y_lo, y_hi]");
  }
  return Region{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                j[3].get<double>()};
}

BetaSchedule beta_from_json(const json& j) {
  const std::string kind = j.value("kind", std::string("log_growth"));
  if (kind == "constant") {
    return BetaSchedule::constant(j.at("beta").get<double>());
  }
  if (kind == "log_growth") {
    BetaSchedule defaults;
    return BetaSchedule::log_growth(j.value("a", defaults.growth_scale),
                                    j.value("b", defaults.growth_rate));
  }
  if (kind == "lemma2") {
    return BetaSchedule::lemma2(j.at("B").get<double>(), j.at("delta").get<double>(),
                                j.value("gamma_scale", 1.0),
                                j.value("gamma_exponent", 1.0));
  }
  throw std::runtime_error("unknown beta schedule kind '" + kind + "'");
}

} // namespace

ProblemConfig problem_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config is not valid JSON: ") + e.what());
  }

  SystemModel model = system_from_json(j.at("system"));

  const double rho_min = j.at("rho_min").get<double>();
  if (!(rho_min > 0.0)) {
    throw std::runtime_error("rho_min must be positive");
  }

  const json& spec_json = j.at("spec");
  std::optional<CaseStudyGeometry> geometry;
  std::optional<std::string> formula_text;
  Formula spec = [&]() -> Formula {
    if (spec_json.contains("formula") == spec_json.contains("regions")) {
      throw std::runtime_error(
          "spec must provide exactly one of 'formula' or 'regions'");
    }
    if (spec_json.contains("formula")) {
      formula_text = spec_json.at("formula").get<std::string>();
      return parse_formula(*formula_text, model.output_dim());
    }
    const json& r = spec_json.at("regions");
    if (!model.is_lti() || model.output_dim() != 4 || model.input_dim() != 2) {
      throw std::runtime_error(
          "'regions' specs require the double_integrator system");
    }
    geometry = CaseStudyGeometry{
        region_from_json(r.at("goal"), "goal"),
        region_from_json(r.at("waypoint1"), "waypoint1"),
        region_from_json(r.at("waypoint2"), "waypoint2"),
        region_from_json(r.at("obstacle"), "obstacle"),
        std::nullopt,
    };
    if (r.contains("control")) {
      const json& c = r.at("control");
      if (!c.is_array() || c.size() != 2) {
        throw std::runtime_error("regions.control must be [u_min, u_max]");
      }
      geometry->control_bound = std::make_pair(c[0].get<double>(), c[1].get<double>());
    }
    if (!j.contains("horizon")) {
      throw std::runtime_error("'regions' specs need a top-level horizon");
    }
    return build_reach_avoid_spec(*geometry, j.at("horizon").get<int>(),
                                  model.input_lower()[0], model.input_upper()[0]);
  }();

  const int structural = horizon(spec);
  const int time_bound = j.value("horizon", structural);
  if (time_bound < structural) {
    throw std::runtime_error("horizon " + std::to_string(time_bound) +
                             " is below the formula horizon " +
                             std::to_string(structural));
  }

  UcbConfig bo;
  if (j.contains("gp")) {
    const json& gp = j.at("gp");
    bo.kernel.signal_variance = gp.value("signal_variance", 1.0);
    bo.kernel.noise_variance = gp.value("noise_variance", 1e-6);
    if (gp.contains("lengthscale") && !gp.at("lengthscale").is_null()) {
      bo.kernel.lengthscale = gp.at("lengthscale").get<double>();
    } else {
      bo.kernel.lengthscale = 0.0; // auto sqrt(d)
    }
    bo.center_targets = gp.value("center", true);
    bo.refit_every = gp.value("refit_every", 0);
  } else {
    bo.kernel.lengthscale = 0.0;
  }

  int bo_init_points = 1;
  if (j.contains("bo")) {
    const json& b = j.at("bo");
    bo.max_iters = b.value("max_iters", 100);
    bo.budget.candidates = b.value("candidates", 512);
    bo.budget.restarts = b.value("restarts", 3);
    bo.budget.refine_passes = b.value("refine_passes", 50);
    bo_init_points = b.value("init_points", 1);
    if (b.contains("beta")) {
      bo.beta = beta_from_json(b.at("beta"));
    }
  }
  bo.rho_min = rho_min;

  DeConfig de;
  if (j.contains("de")) {
    const json& d = j.at("de");
    de.population = d.value("population", de.population);
    de.generations = d.value("generations", de.generations);
    de.weight = d.value("weight", de.weight);
    de.crossover = d.value("crossover", de.crossover);
    de.k_best = d.value("k_best", de.k_best);
  }

  std::vector<std::string> output_names;
  if (j.contains("output_names")) {
    for (const auto& name : j.at("output_names")) {
      output_names.push_back(name.get<std::string>());
    }
    if (static_cast<int>(output_names.size()) != model.output_dim()) {
      throw std::runtime_error("output_names length must equal the output dimension");
    }
  } else {
    for (int i = 0; i < model.output_dim(); ++i) {
      output_names.push_back("y" + std::to_string(i));
    }
  }

  return ProblemConfig{std::move(model), std::move(spec),    time_bound,
                       rho_min,          std::move(bo),      de,
                       bo_init_points,   std::move(output_names),
                       std::move(geometry), std::move(formula_text)};
}

ProblemConfig load_problem(const std::filesystem::path& config_path) {
  std::ifstream in(config_path);
  if (!in) {
    throw std::runtime_error("cannot open config file " + config_path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return problem_from_json(buffer.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(config_path.string() + ": " + e.what());
  }
}

ProblemConfig ProblemConfig::at_horizon(int time_bound) const {
  ProblemConfig copy = *this;
  if (geometry) {
    copy.spec = build_reach_avoid_spec(*geometry, time_bound,
                                       model.input_lower()[0],
                                       model.input_upper()[0]);
  } else {
    const int structural = stlsynth::horizon(spec);
    if (time_bound < structural) {
      throw std::invalid_argument("horizon " + std::to_string(time_bound) +
                                  " is below the formula horizon " +
                                  std::to_string(structural));
    }
  }
  copy.horizon = time_bound;
  return copy;
}

// ---------------------------------------------------------------------------
// Sweep

std::vector<SweepCell> run_sweep(const ProblemConfig& problem,
                                 const std::vector<int>& horizons,
                                 const std::vector<Pipeline>& pipelines,
                                 const std::vector<std::uint64_t>& seeds) {
  if (horizons.empty() || pipelines.empty() || seeds.empty()) {
    throw std::invalid_argument("sweep needs at least one horizon, pipeline and seed");
  }
  std::vector<SweepCell> cells;
  for (int T : horizons) {
    for (Pipeline pipeline : pipelines) {
      for (std::uint64_t seed : seeds) {
        SweepCell cell{T,
                       pipeline,
                       seed,
                       false,
                       "error",
                       std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::quiet_NaN(),
                       0,
                       0.0,
                       ""};
        try {
          const ProblemConfig scaled = problem.at_horizon(T);
          const RunRecord record = run_pipeline(scaled, pipeline, seed);
          cell.ok = true;
          cell.status = to_string(record.result.status);
          cell.rho = record.result.best_rho;
          cell.cost = record.result.best_cost;
          cell.evaluations = record.result.evaluations;
          cell.wall_ms = record.wall_ms;
        } catch (const std::exception& e) {
          cell.note = e.what();
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "T,pipeline,seed,status,rho,J,evaluations,wall_ms,note\n";
  for (const auto& cell : cells) {
    std::string note = cell.note;
    std::replace(note.begin(), note.end(), ',', ';');
    std::replace(note.begin(), note.end(), '\n', ' ');
    out << cell.horizon << ',' << to_string(cell.pipeline) << ',' << cell.seed
        << ',' << cell.status << ',' << fmt17(cell.rho) << ',' << fmt17(cell.cost)
        << ',' << cell.evaluations << ',' << fmt17(cell.wall_ms) << ',' << note
        << '\n';
  }
}

void write_sweep_summary_csv(std::ostream& out,
                             const std::vector<SweepCell>& cells) {
  out << "T,pipeline,n_seeds,n_satisfied,median_rho,median_wall_ms\n";
  std::vector<std::pair<int, Pipeline>> groups;
  for (const auto& cell : cells) {
    const auto key = std::make_pair(cell.horizon, cell.pipeline);
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) {
      groups.push_back(key);
    }
  }
  for (const auto& [T, pipeline] : groups) {
    std::vector<double> rhos;
    std::vector<double> walls;
    int satisfied = 0;
    for (const auto& cell : cells) {
      if (cell.horizon != T || cell.pipeline != pipeline || !cell.ok) continue;
      rhos.push_back(cell.rho);
      walls.push_back(cell.wall_ms);
      if (cell.status == "satisfied") ++satisfied;
    }
    out << T << ',' << to_string(pipeline) << ',' << rhos.size() << ','
        << satisfied << ',' << fmt17(median(rhos)) << ',' << fmt17(median(walls))
        << '\n';
  }
}

// ---------------------------------------------------------------------------
// Trajectory and result files

void write_trace_csv(std::ostream& out, const Trace& trace,
                     const std::vector<std::string>& output_names) {
  if (static_cast<int>(output_names.size()) != trace.dimension()) {
    throw std::invalid_argument("output name count must match trace dimension");
  }
  out << 't';
  for (const auto& name : output_names) {
    out << ',' << name;
  }
  out << '\n';
  for (int t = 0; t < trace.length(); ++t) {
    out << t;
    const Eigen::VectorXd& y = trace.at(t);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      out << ',' << fmt17(y[i]);
    }
    out << '\n';
  }
}

Trace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("trace CSV is empty");
  }
  auto split = [](const std::string& text) {
    std::vector<std::string> fields;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
      fields.push_back(field);
    }
    return fields;
  };

  const auto header = split(line);
  if (header.empty()) {
    throw std::runtime_error("trace CSV has an empty header");
  }
  const bool has_time = header.front() == "t";
  const std::size_t first_col = has_time ? 1 : 0;
  const std::size_t dim = header.size() - first_col;
  if (dim == 0) {
    throw std::runtime_error("trace CSV has no output columns");
  }

  std::vector<Eigen::VectorXd> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("trace CSV row has " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(header.size()));
    }
    Eigen::VectorXd y(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      y[static_cast<Eigen::Index>(i)] = std::stod(fields[first_col + i]);
    }
    samples.push_back(std::move(y));
  }
  return Trace(std::move(samples));
}

void write_run_outputs(const ProblemConfig& problem, const RunRecord& record,
                       const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  {
    std::ofstream trajectory(out_dir / "trajectory.csv");
    write_trace_csv(trajectory, record.trace, problem.output_names);
  }
  {
    std::ofstream iterations(out_dir / "iterations.csv");
    write_iteration_csv(iterations, record.result);
  }

  ordered_json result;
  result["pipeline"] = to_string(record.pipeline);
  result["seed"] = record.seed;
  result["status"] = to_string(record.result.status);
  result["rho"] = record.result.best_rho;
  result["cost"] = record.result.best_cost;
  result["rho_min"] = problem.rho_min;
  result["horizon"] = problem.horizon;
  result["evaluations"] = record.result.evaluations;
  result["wall_ms"] = record.wall_ms;
  std::vector<std::vector<double>> control;
  for (int t = 0; t < record.result.best_input.length(); ++t) {
    const Eigen::VectorXd& u = record.result.best_input.at(t);
    control.emplace_back(u.data(), u.data() + u.size());
  }
  result["control"] = control;

  std::ofstream result_file(out_dir / "result.json");
  result_file << result.dump(2) << '\n';
}

} // namespace stlsynth
