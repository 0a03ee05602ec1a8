#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

#include "stlsynth/stl.hpp"

namespace stlsynth {

/// Axis-aligned box in R^d, used as the search domain for optimizers.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(lower.size()); }
};

enum class OutputSource { State, Input };

/// One coordinate of an output map that selects state or input components.
struct OutputComponent {
  OutputSource source;
  int index;
};

/// Deterministic discrete-time control system
///
///   x_{t+1} = f(x_t, u_t),   y_t = g(x_t, u_t),
///
/// with inputs confined to the compact box [u_min, u_max]. Immutable; rollout
/// is pure, so a model can be evaluated from many threads at once. Generic
/// dynamics are supplied as functions; LTI models built through lti() or
/// double_integrator() additionally retain their matrices.
class SystemModel {
public:
  using TransitionFn =
      std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

  SystemModel(int state_dim, int input_dim, int output_dim, TransitionFn dynamics,
              TransitionFn output, Eigen::VectorXd u_min, Eigen::VectorXd u_max,
              Eigen::VectorXd x0);

  /// x_{t+1} = A x_t + B u_t with outputs picked from state/input coordinates.
  static SystemModel lti(Eigen::MatrixXd A, Eigen::MatrixXd B,
                         std::vector<OutputComponent> output_map,
                         Eigen::VectorXd u_min, Eigen::VectorXd u_max,
                         Eigen::VectorXd x0);

  /// The 2D double-integrator benchmark: n=4, m=2, y = (x1, x3, u1, u2),
  /// identical acceleration bounds on both input coordinates, x0 = 0.
  static SystemModel double_integrator(double u_min, double u_max);

  int state_dim() const { return n_; }
  int input_dim() const { return m_; }
  int output_dim() const { return p_; }
  const Eigen::VectorXd& input_lower() const { return u_min_; }
  const Eigen::VectorXd& input_upper() const { return u_max_; }
  const Eigen::VectorXd& initial_state() const { return x0_; }

  SystemModel with_initial_state(Eigen::VectorXd x0) const;

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;
  Eigen::VectorXd output(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

  bool is_lti() const { return A_.size() != 0; }
  const Eigen::MatrixXd& dynamics_matrix() const { return A_; }
  const Eigen::MatrixXd& input_matrix() const { return B_; }
  const std::vector<OutputComponent>& output_map() const { return output_map_; }

private:
  int n_, m_, p_;
  TransitionFn f_;
  TransitionFn g_;
  Eigen::VectorXd u_min_, u_max_, x0_;
  // Populated for LTI models only.
  Eigen::MatrixXd A_, B_;
  std::vector<OutputComponent> output_map_;
};

/// Control tape u_0..u_T. Inputs are clamped coordinate-wise into
/// [u_min, u_max] at construction, so a ControlSequence always lies in the
/// feasible set regardless of where the raw numbers came from.
class ControlSequence {
public:
  ControlSequence(std::vector<Eigen::VectorXd> inputs, const Eigen::VectorXd& u_min,
                  const Eigen::VectorXd& u_max);

  /// Unflattens a stacked vector [u_0; u_1; ...] of dimension m*(T+1).
  static ControlSequence from_flat(const Eigen::VectorXd& flat, int input_dim,
                                   const Eigen::VectorXd& u_min,
                                   const Eigen::VectorXd& u_max);

  int length() const { return static_cast<int>(inputs_.size()); }
  int input_dim() const { return static_cast<int>(inputs_.front().size()); }
  const Eigen::VectorXd& at(int t) const;
  Eigen::VectorXd flattened() const;

  bool operator==(const ControlSequence& other) const;

private:
  std::vector<Eigen::VectorXd> inputs_;
};

/// Search box for a control tape of the given length: the per-step input
/// bounds tiled length times.
Box control_box(const SystemModel& model, int length);

/// Simulates the system forward under the control tape; the trace has one
/// output sample per control step. Deterministic: identical inputs produce
/// bit-identical traces.
Trace rollout(const SystemModel& model, const ControlSequence& u);

/// Synthesis cost J(u) = -robustness(spec, rollout(model, u), 0).
/// The control tape must cover the formula horizon.
double objective(const SystemModel& model, const Formula& spec,
                 const ControlSequence& u);

/// J as a function of the flattened control vector, for optimizers that work
/// over the box control_box(model, length).
std::function<double(const Eigen::VectorXd&)>
objective_on_flat(const SystemModel& model, const Formula& spec, int length);

} // namespace stlsynth
