#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hjbi/grid.hpp"
#include "hjbi/types.hpp"

namespace hjbi {

using VectorFn = std::function<Vec(double, const Vec&, const Vec&)>;
using ScalarFn = std::function<double(double, const Vec&, const Vec&)>;
using TerminalFn = std::function<double(const Vec&)>;
using DampingFn = std::function<double(double)>;

// One game instance as data: dynamics, jump maps, gains, costs, discount,
// damping and the finite candidate control grids. Immutable after
// construction; all operations on it are pure.
struct GameProblem {
  int state_dim = 1;
  std::vector<Vec> continuous_controls;  // theta candidates in R^l
  std::vector<Vec> max_impulses;         // xi candidates in U, zero excluded
  std::vector<Vec> min_impulses;         // eta candidates in V, zero excluded

  VectorFn dynamics;      // b(s, y; theta)
  VectorFn jump_max;      // g_xi(s, y; xi)
  VectorFn jump_min;      // g_eta(s, y; eta)
  ScalarFn running_gain;  // f(s, y; theta)
  ScalarFn cost_max;      // c(s, y; xi) > 0
  ScalarFn cost_min;      // chi(s, y; eta) > 0
  TerminalFn terminal_gain;

  double discount = 1.0;  // lambda > 0
  double t_start = 0.0;
  double t_end = 1.0;
  DampingFn damping;  // Phi(h) in (0,1)
};

// Basic structural checks (non-empty grids, nonzero impulses, positive
// discount). Throws ConfigError. Numeric assumption audits live in
// validate_assumptions.
void check_structure(const GameProblem& problem);

struct Violation {
  std::string assumption;
  std::string witness;
};

struct AssumptionReport {
  double bound_m_estimate = 0.0;    // max of the two sampled sups below
  double sup_dynamics = 0.0;        // sampled sup of ||b||_inf
  double sup_running_gain = 0.0;    // sampled sup of |f|
  std::map<std::string, double> lipschitz_estimates;
  double cost_infimum = 0.0;
  bool terminal_no_impulse_ok = true;
  std::vector<Violation> violations;
};

AssumptionReport validate_assumptions(const GameProblem& problem, const TimeSpaceGrid& sample_grid,
                                      double cost_tolerance = 1e-6);

// One impulse entry. Placeholder entries mirror the required initial
// (tau_1*, xi_1*) / (rho_1*, eta_1*) inputs of the forward pass; they carry
// no jump and no cost when a trajectory is replayed.
struct Impulse {
  double time = 0.0;
  Vec value;
  int grid_index = -1;
  bool placeholder = false;
};

struct ControlInputs {
  std::vector<std::optional<int>> theta_timeline;  // index into continuous_controls per step
  std::vector<Impulse> max_impulses;
  std::vector<Impulse> min_impulses;
};

struct TrajectoryRecord {
  std::vector<Vec> states;            // per time node
  std::vector<Regime> regimes;        // per time node (last = terminal)
  std::vector<double> realized_values;  // per time node; NaN when not computed
  double payoff = 0.0;                // discrete functional J_h
  bool truncated = false;
  std::string diagnostic;
};

// Explicit-Euler path of the discrete state recursion with jumps. Within a
// step window [s_d, s_d+h) an impulse suppresses the drift term; when a
// maximizer impulse time coincides exactly with a minimizer impulse time only
// the minimizer's jump (and cost) is applied. The record carries the realized
// discrete payoff J_h. `domain` optionally enforces the space box under the
// error boundary policy.
TrajectoryRecord simulate_trajectory(const GameProblem& problem, double t0, const Vec& start,
                                     const ControlInputs& controls, double h,
                                     const TimeSpaceGrid* domain = nullptr);

}  // namespace hjbi
