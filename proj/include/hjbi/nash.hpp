#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hjbi/game_model.hpp"
#include "hjbi/solver.hpp"

namespace hjbi {

// Equilibrium strategy pair extracted forward from a solved value field. Each
// impulse list starts with the required placeholder entry (tau_1*, xi_1*) /
// (rho_1*, eta_1*); real impulses follow with strictly increasing times in
// [t, T). Continuous-control entries are absent at impulse nodes and at the
// terminal node.
struct NashStrategy {
  std::vector<std::optional<int>> theta_timeline;
  std::vector<Impulse> max_impulses;
  std::vector<Impulse> min_impulses;

  ControlInputs to_controls() const;
};

struct ExtractionResult {
  NashStrategy strategy;
  TrajectoryRecord path;
};

// Phase 2: walks i = 1..I-1 from the start state. At each step the
// continuous-control continuation candidate at the exact path point is
// tested, minimizer first, against the damped impulse-operator values on the
// published field: intervene when continuing is worse than the minimizer's
// impulse (or better than the maximizer's), else take the optimal Euler step.
// All operator evaluations are fresh at the path point. The record's payoff
// is the replayed discrete functional J_h.
ExtractionResult extract_equilibrium(const GameProblem& problem, const TimeSpaceGrid& grid,
                                     const SolveReport& report, const Vec& start,
                                     const SolverConfig& config);

// Discrete payoff J_h of an explicit control pair from (t0, x).
double evaluate_payoff(const GameProblem& problem, double t0, const Vec& start,
                       const ControlInputs& controls, double h);
double evaluate_payoff(const GameProblem& problem, double t0, const Vec& start,
                       const NashStrategy& strategy, double h);

struct DeviationRecord {
  std::string kind;
  double payoff = 0.0;
  double improvement = 0.0;  // positive means the deviator gained
};

struct NEReport {
  double value_at_start = 0.0;     // v_h(t, x)
  double equilibrium_payoff = 0.0; // J_h(psi*, v*)
  double value_match_error = 0.0;
  bool value_match_ok = false;
  int deviations_per_side = 0;
  double worst_max_improvement = 0.0;
  double worst_min_improvement = 0.0;
  DeviationRecord worst_max_deviation;
  DeviationRecord worst_min_deviation;
  double tolerance = 0.0;
  bool pass = false;
};

// Empirical equilibrium audit: checks J_h(psi*, v*) against v_h(t, x) and
// replays seeded unilateral deviations (perturbed continuous timeline;
// added / removed / shifted / resized impulses drawn from the control grids)
// for each player. A failing check is a report result, not an error.
NEReport verify_equilibrium(const GameProblem& problem, const TimeSpaceGrid& grid,
                            const SolveReport& report, const Vec& start, int deviation_budget,
                            std::uint64_t seed, double tol_ne, const SolverConfig& config);

}  // namespace hjbi
