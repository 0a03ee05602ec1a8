#include "stlsynth/system.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace stlsynth {

namespace {

void check_bounds(const Eigen::VectorXd& u_min, const Eigen::VectorXd& u_max) {
  if (u_min.size() != u_max.size() || u_min.size() < 1) {
    throw std::invalid_argument("input bounds must share a dimension >= 1");
  }
  for (Eigen::Index j = 0; j < u_min.size(); ++j) {
    if (!(u_min[j] <= u_max[j])) {
      throw std::invalid_argument("input bound " + std::to_string(j) +
                                  " is empty: u_min > u_max");
    }
  }
}

} // namespace

SystemModel::SystemModel(int state_dim, int input_dim, int output_dim,
                         TransitionFn dynamics, TransitionFn output,
                         Eigen::VectorXd u_min, Eigen::VectorXd u_max,
                         Eigen::VectorXd x0)
    : n_(state_dim), m_(input_dim), p_(output_dim), f_(std::move(dynamics)),
      g_(std::move(output)), u_min_(std::move(u_min)), u_max_(std::move(u_max)),
      x0_(std::move(x0)) {
  if (n_ < 1 || m_ < 1 || p_ < 1) {
    throw std::invalid_argument("system dimensions must be >= 1");
  }
  if (!f_ || !g_) {
    throw std::invalid_argument("dynamics and output functions must be callable");
  }
  if (u_min_.size() != m_ || u_max_.size() != m_) {
    throw std::invalid_argument("input bounds must have dimension m");
  }
  if (x0_.size() != n_) {
    throw std::invalid_argument("initial state must have dimension n");
  }
  check_bounds(u_min_, u_max_);
}

SystemModel SystemModel::lti(Eigen::MatrixXd A, Eigen::MatrixXd B,
                             std::vector<OutputComponent> output_map,
                             Eigen::VectorXd u_min, Eigen::VectorXd u_max,
                             Eigen::VectorXd x0) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  const int p = static_cast<int>(output_map.size());
  if (A.cols() != n) {
    throw std::invalid_argument("dynamics matrix A must be square");
  }
  if (B.rows() != n) {
    throw std::invalid_argument("input matrix B must have n rows");
  }
  for (const auto& c : output_map) {
    const int limit = c.source == OutputSource::State ? n : m;
    if (c.index < 0 || c.index >= limit) {
      throw std::invalid_argument("output component index out of range");
    }
  }

  Eigen::MatrixXd A_copy = A;
  Eigen::MatrixXd B_copy = B;
  auto dynamics = [A = std::move(A_copy), B = std::move(B_copy)](
                      const Eigen::VectorXd& x,
                      const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return A * x + B * u;
  };
  auto output = [map = output_map](const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u) -> Eigen::VectorXd {
    Eigen::VectorXd y(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
      y[static_cast<Eigen::Index>(i)] =
          map[i].source == OutputSource::State ? x[map[i].index] : u[map[i].index];
    }
    return y;
  };

  SystemModel model(n, m, p, std::move(dynamics), std::move(output),
                    std::move(u_min), std::move(u_max), std::move(x0));
  model.A_ = std::move(A);
  model.B_ = std::move(B);
  model.output_map_ = std::move(output_map);
  return model;
}

SystemModel SystemModel::double_integrator(double u_min, double u_max) {
  if (!(u_min < u_max)) {
    throw std::invalid_argument("double_integrator requires u_min < u_max");
  }
  Eigen::MatrixXd A(4, 4);
  A << 1, 1, 0, 0, //
      0, 1, 0, 0,  //
      0, 0, 1, 1,  //
      0, 0, 0, 1;
  Eigen::MatrixXd B(4, 2);
  B << 0, 0, //
      1, 0,  //
      0, 0,  //
      0, 1;
  std::vector<OutputComponent> output_map = {
      {OutputSource::State, 0},
      {OutputSource::State, 2},
      {OutputSource::Input, 0},
      {OutputSource::Input, 1},
  };
  return lti(std::move(A), std::move(B), std::move(output_map),
             Eigen::Vector2d::Constant(u_min), Eigen::Vector2d::Constant(u_max),
             Eigen::VectorXd::Zero(4));
}

SystemModel SystemModel::with_initial_state(Eigen::VectorXd x0) const {
  SystemModel copy = *this;
  if (x0.size() != n_) {
    throw std::invalid_argument("initial state must have dimension n");
  }
  copy.x0_ = std::move(x0);
  return copy;
}

Eigen::VectorXd SystemModel::step(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u) const {
  if (x.size() != n_ || u.size() != m_) {
    throw std::invalid_argument("step: state/input dimension mismatch");
  }
  return f_(x, u);
}

Eigen::VectorXd SystemModel::output(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& u) const {
  if (x.size() != n_ || u.size() != m_) {
    throw std::invalid_argument("output: state/input dimension mismatch");
  }
  return g_(x, u);
}

// ---------------------------------------------------------------------------
// ControlSequence

ControlSequence::ControlSequence(std::vector<Eigen::VectorXd> inputs,
                                 const Eigen::VectorXd& u_min,
                                 const Eigen::VectorXd& u_max)
    : inputs_(std::move(inputs)) {
  if (inputs_.empty()) {
    throw std::invalid_argument("control sequence needs at least one input");
  }
  check_bounds(u_min, u_max);
  const Eigen::Index m = u_min.size();
  for (auto& u : inputs_) {
    if (u.size() != m) {
      throw std::invalid_argument("control input dimension mismatch");
    }
    u = u.cwiseMax(u_min).cwiseMin(u_max);
  }
}

ControlSequence ControlSequence::from_flat(const Eigen::VectorXd& flat,
                                           int input_dim,
                                           const Eigen::VectorXd& u_min,
                                           const Eigen::VectorXd& u_max) {
  if (input_dim < 1 || flat.size() % input_dim != 0 || flat.size() == 0) {
    throw std::invalid_argument("flattened control length must be a positive "
                                "multiple of the input dimension");
  }
  const int steps = static_cast<int>(flat.size()) / input_dim;
  std::vector<Eigen::VectorXd> inputs;
  inputs.reserve(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    inputs.push_back(flat.segment(static_cast<Eigen::Index>(t) * input_dim, input_dim));
  }
  return ControlSequence(std::move(inputs), u_min, u_max);
}

const Eigen::VectorXd& ControlSequence::at(int t) const {
  if (t < 0 || t >= length()) {
    throw std::out_of_range("control index out of range");
  }
  return inputs_[static_cast<std::size_t>(t)];
}

Eigen::VectorXd ControlSequence::flattened() const {
  const int m = input_dim();
  Eigen::VectorXd flat(static_cast<Eigen::Index>(length()) * m);
  for (int t = 0; t < length(); ++t) {
    flat.segment(static_cast<Eigen::Index>(t) * m, m) = inputs_[static_cast<std::size_t>(t)];
  }
  return flat;
}

bool ControlSequence::operator==(const ControlSequence& other) const {
  if (length() != other.length() || input_dim() != other.input_dim()) {
    return false;
  }
  for (int t = 0; t < length(); ++t) {
    if (inputs_[static_cast<std::size_t>(t)] != other.inputs_[static_cast<std::size_t>(t)]) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Simulation and objective

Box control_box(const SystemModel& model, int length) {
  if (length < 1) {
    throw std::invalid_argument("control length must be >= 1");
  }
  const int m = model.input_dim();
  Box box;
  box.lower.resize(static_cast<Eigen::Index>(length) * m);
  box.upper.resize(static_cast<Eigen::Index>(length) * m);
  for (int t = 0; t < length; ++t) {
    box.lower.segment(static_cast<Eigen::Index>(t) * m, m) = model.input_lower();
    box.upper.segment(static_cast<Eigen::Index>(t) * m, m) = model.input_upper();
  }
  return box;
}

Trace rollout(const SystemModel& model, const ControlSequence& u) {
  if (u.input_dim() != model.input_dim()) {
    throw std::invalid_argument("rollout: control input dimension mismatch");
  }
  std::vector<Eigen::VectorXd> samples;
  samples.reserve(static_cast<std::size_t>(u.length()));
  Eigen::VectorXd x = model.initial_state();
  for (int t = 0; t < u.length(); ++t) {
    const Eigen::VectorXd& ut = u.at(t);
    samples.push_back(model.output(x, ut));
    if (t + 1 < u.length()) {
      x = model.step(x, ut);
    }
  }
  return Trace(std::move(samples));
}

double objective(const SystemModel& model, const Formula& spec,
                 const ControlSequence& u) {
  const int needed = horizon(spec) + 1;
  if (u.length() < needed) {
    throw std::invalid_argument("control tape has " + std::to_string(u.length()) +
                                " steps but the specification horizon needs " +
                                std::to_string(needed));
  }
  return -robustness(spec, rollout(model, u), 0);
}

std::function<double(const Eigen::VectorXd&)>
objective_on_flat(const SystemModel& model, const Formula& spec, int length) {
  const int needed = horizon(spec) + 1;
  if (length < needed) {
    throw std::invalid_argument("control length shorter than formula horizon");
  }
  return [model, spec, length](const Eigen::VectorXd& flat) {
    return objective(model, spec,
                     ControlSequence::from_flat(flat, model.input_dim(),
                                                model.input_lower(),
                                                model.input_upper()));
  };
}

} // namespace stlsynth
