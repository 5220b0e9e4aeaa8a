#include "hjbi/operators.hpp"

#include <cmath>
#include <limits>

namespace hjbi {

namespace {

Vec shifted(std::span<const double> y, const Vec& delta, double scale) {
  Vec out(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) out[k] = y[k] + scale * delta[k];
  return out;
}

}  // namespace

OperatorResult approximate_hamiltonian(const GameProblem& problem, const TimeSpaceGrid& grid,
                                       std::span<const double> field_next, double s,
                                       std::span<const double> y) {
  const double h = grid.h;
  const double keep = 1.0 - problem.discount * h;
  Vec point(y.begin(), y.end());

  OperatorResult best{-std::numeric_limits<double>::infinity(), -1, Regime::continuous};
  for (int idx = 0; idx < static_cast<int>(problem.continuous_controls.size()); ++idx) {
    const Vec& theta = problem.continuous_controls[idx];
    const Vec b = problem.dynamics(s, point, theta);
    const Vec target = shifted(y, b, h);
    const double value =
        keep * interpolate(field_next, grid, target) + h * problem.running_gain(s, point, theta);
    if (value > best.value) {
      best.value = value;
      best.index = idx;
    }
  }
  return best;
}

OperatorResult max_cost_operator(const GameProblem& problem, const TimeSpaceGrid& grid,
                                 std::span<const double> field_same, double s,
                                 std::span<const double> y) {
  Vec point(y.begin(), y.end());
  OperatorResult best{-std::numeric_limits<double>::infinity(), -1, Regime::max_impulse};
  for (int idx = 0; idx < static_cast<int>(problem.max_impulses.size()); ++idx) {
    const Vec& xi = problem.max_impulses[idx];
    const Vec g = problem.jump_max(s, point, xi);
    const Vec target = shifted(y, g, 1.0);
    const double value =
        interpolate(field_same, grid, target) - problem.cost_max(s, point, xi);
    if (value > best.value) {
      best.value = value;
      best.index = idx;
    }
  }
  return best;
}

OperatorResult min_cost_operator(const GameProblem& problem, const TimeSpaceGrid& grid,
                                 std::span<const double> field_same, double s,
                                 std::span<const double> y) {
  Vec point(y.begin(), y.end());
  OperatorResult best{std::numeric_limits<double>::infinity(), -1, Regime::min_impulse};
  for (int idx = 0; idx < static_cast<int>(problem.min_impulses.size()); ++idx) {
    const Vec& eta = problem.min_impulses[idx];
    const Vec g = problem.jump_min(s, point, eta);
    const Vec target = shifted(y, g, 1.0);
    const double value =
        interpolate(field_same, grid, target) + problem.cost_min(s, point, eta);
    if (value < best.value) {
      best.value = value;
      best.index = idx;
    }
  }
  return best;
}

OperatorResult bellman_map(const GameProblem& problem, const TimeSpaceGrid& grid,
                           std::span<const double> field_next, std::span<const double> field_same,
                           double s, std::span<const double> y) {
  if (s >= problem.t_end - 0.5 * grid.h) {
    Vec point(y.begin(), y.end());
    return {problem.terminal_gain(point), -1, Regime::terminal};
  }
  const double phi = problem.damping(grid.h);

  const OperatorResult cont = approximate_hamiltonian(problem, grid, field_next, s, y);
  const OperatorResult hi = max_cost_operator(problem, grid, field_same, s, y);
  const OperatorResult lo = min_cost_operator(problem, grid, field_same, s, y);

  OperatorResult inner = cont;
  if (phi * hi.value > inner.value) {
    inner = hi;
    inner.value = phi * hi.value;
    inner.branch = Regime::max_impulse;
  }
  if (phi * lo.value < inner.value) {
    OperatorResult out = lo;
    out.value = phi * lo.value;
    out.branch = Regime::min_impulse;
    return out;
  }
  return inner;
}

ObstacleResiduals obstacle_residuals(const GameProblem& problem, const TimeSpaceGrid& grid,
                                     const ValueField& field, int slice, std::size_t node) {
  if (slice + 1 >= field.num_time_nodes)
    throw ConfigError("obstacle residuals are defined on interior time slices only");
  const double s = grid.time_node(slice);
  const Vec y = grid.space_node(node);
  const double v = field.at(slice, node);
  const double phi = problem.damping(grid.h);

  ObstacleResiduals r;
  r.hjb = v - approximate_hamiltonian(problem, grid, field.slice(slice + 1), s, y).value;
  r.lower_gap = v - phi * max_cost_operator(problem, grid, field.slice(slice), s, y).value;
  r.upper_gap = v - phi * min_cost_operator(problem, grid, field.slice(slice), s, y).value;
  return r;
}

}  // namespace hjbi
