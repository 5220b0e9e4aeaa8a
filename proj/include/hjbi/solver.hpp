#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hjbi/game_model.hpp"
#include "hjbi/grid.hpp"
#include "hjbi/operators.hpp"

namespace hjbi {

enum class ImpulseSide : unsigned char { min_player, max_player };

struct SolverConfig {
  double tolerance = 1e-9;
  int max_iterations = 5000;
  double switch_tolerance = -1.0;  // < 0 means "use tolerance"
  bool record_convergence = false;
  bool allow_large_lambda_h = false;
  // Recorded value of the required initial minimizer impulse marker eta_1*.
  // Never applied to the state; surfaced in strategy output only.
  std::optional<Vec> min_placeholder;

  double effective_switch_tolerance() const {
    return switch_tolerance >= 0.0 ? switch_tolerance : tolerance;
  }
};

struct ValueIterationResult {
  std::vector<double> values;
  int iterations = 0;
};

// Damped fixed-point iteration for the impulse-value equation at one time
// slice:
//   V <- Phi(h) * ( I[V](y_j + g(s_i, y_j; .)) + chi )   (min side)
//   V <- Phi(h) * ( I[V](y_j + g(s_i, y_j; .)) - c   )   (max side)
// With `fixed_policy` the impulse per node is frozen; otherwise the full
// min/max over the impulse grid is applied each sweep. Jacobi updates with
// double buffering. `iterate_history`, when given, receives the initial field
// followed by every iterate.
ValueIterationResult value_iteration(const GameProblem& problem, const TimeSpaceGrid& grid,
                                     int slice, ImpulseSide side,
                                     const std::vector<int>* fixed_policy,
                                     std::span<const double> initial, const SolverConfig& config,
                                     std::vector<std::string>* warnings = nullptr,
                                     std::vector<std::vector<double>>* iterate_history = nullptr);

struct PolicyIterationResult {
  std::vector<double> values;
  std::vector<int> policy;
  int outer_iterations = 0;
  long value_iterations = 0;
};

// Alternates policy evaluation (value_iteration with the frozen policy) and
// policy improvement (argmin/argmax over the impulse grid) until the policy
// index vector is stable. `outer_history`, when given, receives the evaluated
// values after each evaluation step.
PolicyIterationResult policy_iteration_min(const GameProblem& problem, const TimeSpaceGrid& grid,
                                           int slice, std::vector<int> initial_policy,
                                           std::span<const double> initial_values,
                                           const SolverConfig& config,
                                           std::vector<std::string>* warnings = nullptr,
                                           std::vector<std::vector<double>>* outer_history = nullptr);

PolicyIterationResult policy_iteration_max(const GameProblem& problem, const TimeSpaceGrid& grid,
                                           int slice, std::vector<int> initial_policy,
                                           std::span<const double> initial_values,
                                           const SolverConfig& config,
                                           std::vector<std::string>* warnings = nullptr,
                                           std::vector<std::vector<double>>* outer_history = nullptr);

struct SliceStats {
  int slice = 0;
  int policy_outer_min = 0;
  int policy_outer_max = 0;
  long value_iterations_min = 0;
  long value_iterations_max = 0;
  int reconcile_iterations = 0;
  double residual = 0.0;
};

struct SolveReport {
  ValueField field;
  // Step-1 / Step-2 / Step-3 candidate values per node, exposed for
  // inspection; the published field is their fixed-point reconciliation.
  std::vector<double> candidate_continuous;
  std::vector<double> candidate_min;
  std::vector<double> candidate_max;
  std::vector<SliceStats> slices;
  double max_residual = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
  std::vector<std::vector<double>> convergence_history;  // reconcile deltas per slice
  bool converged = true;
};

// Phase 1: backward time sweep. Per slice computes the continuous-control
// recursion, both players' intervention values by policy iteration, and
// publishes the value reconciled through the full fixed-point map so the
// composite obstacle residual vanishes within tolerance.
SolveReport backward_sweep(const GameProblem& problem, const TimeSpaceGrid& grid,
                           const SolverConfig& config);

struct RefinementRow {
  double h = 0.0;
  double sup_diff = 0.0;  // against the finest h on common nodes
  long iterations = 0;
  double value_at_probe = 0.0;
};

struct RefinementStudy {
  std::vector<RefinementRow> rows;  // ordered as h_list (decreasing)
  bool monotone_trend = true;
  std::vector<std::string> warnings;
};

// Solves at each step of a decreasing h list on a fixed space grid and
// reports sup differences to the finest solution on shared nodes.
RefinementStudy refinement_study(const GameProblem& problem, const std::vector<AxisSpec>& space_box,
                                 BoundaryPolicy boundary, const std::vector<double>& h_list,
                                 const SolverConfig& config, const Vec* probe_point = nullptr);

}  // namespace hjbi
