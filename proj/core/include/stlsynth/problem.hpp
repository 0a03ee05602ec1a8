#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stlsynth/de.hpp"
#include "stlsynth/stl.hpp"
#include "stlsynth/system.hpp"
#include "stlsynth/ucb.hpp"

namespace stlsynth {

/// Axis-aligned rectangle in the workspace plane.
struct Region {
  double x_lo, x_hi, y_lo, y_hi;
};

/// Geometry of the reach-avoid case study: visit one of two waypoints and
/// the goal within the time bound while always staying clear of the obstacle
/// and keeping inputs inside a bound. The control bound of the STL term may
/// sit strictly inside the hard input box, in which case it acts as a
/// robustness shaping term instead of a zero cap at the clamp boundary.
struct CaseStudyGeometry {
  Region goal;
  Region waypoint1;
  Region waypoint2;
  Region obstacle;
  /// Control bound used by the STL term; the system's input box when absent.
  std::optional<std::pair<double, double>> control_bound;
};

/// Membership in a region as a conjunction of its four half-planes over
/// outputs (y[x_index], y[y_index]); robustness is the inside margin.
Formula region_membership(const Region& region, int x_index, int y_index,
                          int dimension);

/// Clearance from a region as the disjunction of the four outward
/// half-planes (equivalently, not-inside).
Formula region_avoidance(const Region& region, int x_index, int y_index,
                         int dimension);

/// The reach-avoid specification over double-integrator outputs
/// y = (x-position, y-position, u1, u2):
///
///   F[0,T](waypoint1 or waypoint2) and F[0,T](goal)
///   and G[0,T](not obstacle) and G[0,T](inputs within the control bound)
///
/// fallback_u_min/max supply the control bound when the geometry does not
/// carry its own.
Formula build_reach_avoid_spec(const CaseStudyGeometry& geometry, int time_bound,
                               double fallback_u_min, double fallback_u_max);

enum class Pipeline { DeOnly, BoOnly, DeBo };

const char* to_string(Pipeline pipeline);
Pipeline pipeline_from_string(const std::string& name);

/// A fully assembled synthesis problem. Built from a JSON config file; see
/// the README for the schema. Holds everything a pipeline run needs.
struct ProblemConfig {
  SystemModel model;
  Formula spec;
  int horizon;    // control tape covers t = 0..horizon
  double rho_min;
  UcbConfig bo;   // seed field is overridden per run
  DeConfig de;    // ditto
  int bo_init_points; // random initial guesses for the BO-only pipeline
  std::vector<std::string> output_names; // trajectory CSV headers
  /// Present when the spec came from case-study geometry; enables rebuilding
  /// at other time bounds.
  std::optional<CaseStudyGeometry> geometry;
  /// Raw formula text when the spec was given directly.
  std::optional<std::string> formula_text;

  /// Rebuilds the problem at a different time bound: geometry-based specs
  /// are re-instantiated with windows [0,T]; textual specs keep their
  /// structure and only the control tape grows (T must cover the horizon).
  ProblemConfig at_horizon(int time_bound) const;
};

ProblemConfig problem_from_json(const std::string& json_text);
ProblemConfig load_problem(const std::filesystem::path& config_path);

/// Outcome of one pipeline run, already validated: a result marked satisfied
/// is re-checked against the Boolean semantics before being returned.
struct RunRecord {
  Pipeline pipeline;
  std::uint64_t seed;
  SynthesisResult result;
  Trace trace; // rollout of the best control tape
  double wall_ms;
};

RunRecord run_pipeline(const ProblemConfig& problem, Pipeline pipeline,
                       std::uint64_t seed);

/// Writes trajectory.csv, iterations.csv and result.json under out_dir.
void write_run_outputs(const ProblemConfig& problem, const RunRecord& record,
                       const std::filesystem::path& out_dir);

/// One sweep cell; `ok` is false when the cell failed outright, with the
/// reason in `note`.
struct SweepCell {
  int horizon;
  Pipeline pipeline;
  std::uint64_t seed;
  bool ok;
  std::string status;
  double rho;
  double cost;
  int evaluations;
  double wall_ms;
  std::string note;
};

/// Runs every (horizon, pipeline, seed) cell, recording per-cell failures
/// without aborting the sweep.
std::vector<SweepCell> run_sweep(const ProblemConfig& problem,
                                 const std::vector<int>& horizons,
                                 const std::vector<Pipeline>& pipelines,
                                 const std::vector<std::uint64_t>& seeds);

/// Per-cell rows: T,pipeline,seed,status,rho,J,evaluations,wall_ms,note.
void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);

/// Medians per (T, pipeline):
/// T,pipeline,n_seeds,n_satisfied,median_rho,median_wall_ms.
void write_sweep_summary_csv(std::ostream& out, const std::vector<SweepCell>& cells);

/// Trajectory CSV: header row, then one row per timestep (t plus outputs).
void write_trace_csv(std::ostream& out, const Trace& trace,
                     const std::vector<std::string>& output_names);

/// Reads a trajectory CSV; a leading `t` column is recognized by header name
/// and skipped.
Trace read_trace_csv(std::istream& in);

} // namespace stlsynth
