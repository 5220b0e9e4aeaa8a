#pragma once

#include <span>

#include "hjbi/game_model.hpp"
#include "hjbi/grid.hpp"

namespace hjbi {

// Result of one pointwise operator evaluation: the attained value, the index
// of the optimizing control in the corresponding grid (-1 when none applies)
// and the regime branch that attained it.
struct OperatorResult {
  double value = 0.0;
  int index = -1;
  Regime branch = Regime::continuous;
};

// Continuous-control one-step value
//   B(s,y) = max_theta { (1-lambda*h) * I[field_next](y + h*b(s,y;theta)) + h*f(s,y;theta) },
// so that the approximate Hamiltonian is H_h = v(s,y) - B(s,y). Ties pick the
// lowest control index.
OperatorResult approximate_hamiltonian(const GameProblem& problem, const TimeSpaceGrid& grid,
                                       std::span<const double> field_next, double s,
                                       std::span<const double> y);

// Maximum non-local cost operator on the grid:
//   max_xi { I[field_same](y + g_xi(s,y;xi)) - c(s,y;xi) }.
OperatorResult max_cost_operator(const GameProblem& problem, const TimeSpaceGrid& grid,
                                 std::span<const double> field_same, double s,
                                 std::span<const double> y);

// Minimum non-local cost operator on the grid:
//   min_eta { I[field_same](y + g_eta(s,y;eta)) + chi(s,y;eta) }.
OperatorResult min_cost_operator(const GameProblem& problem, const TimeSpaceGrid& grid,
                                 std::span<const double> field_same, double s,
                                 std::span<const double> y);

// One application of the fixed-point map:
//   F v (s,y) = min{ max[ B(s,y), Phi(h)*Hsup(s,y) ], Phi(h)*Hinf(s,y) },
// with ties resolved toward the earlier branch (continuous, then
// max-impulse). At the terminal time it returns G(y) unconditionally.
OperatorResult bellman_map(const GameProblem& problem, const TimeSpaceGrid& grid,
                           std::span<const double> field_next, std::span<const double> field_same,
                           double s, std::span<const double> y);

struct ObstacleResiduals {
  double hjb = 0.0;        // r1 = v - B
  double lower_gap = 0.0;  // r2 = v - Phi*Hsup
  double upper_gap = 0.0;  // r3 = v - Phi*Hinf
  double composite() const {
    const double inner = hjb < lower_gap ? hjb : lower_gap;
    return inner > upper_gap ? inner : upper_gap;
  }
};

// Scheme residuals at an interior grid node; the composite
// max{min[r1, r2]; r3} vanishes at a solution.
ObstacleResiduals obstacle_residuals(const GameProblem& problem, const TimeSpaceGrid& grid,
                                     const ValueField& field, int slice, std::size_t node);

}  // namespace hjbi
