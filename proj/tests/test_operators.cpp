#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "hjbi/operators.hpp"

using namespace hjbi;
using namespace hjbi::testing;

TEST_CASE("continuous one-step value: zero model and constant field") {
  const TimeSpaceGrid grid = unit_grid_1d(0.5);
  GameProblem p = zero_model();
  std::vector<double> zeros(grid.num_space_nodes(), 0.0);

  auto r = approximate_hamiltonian(p, grid, zeros, 0.0, Vec{1.0});
  CHECK(r.value == 0.0);  // f = 0, field = 0 -> B = 0 and H_h(v=0) = 0

  std::vector<double> constant(grid.num_space_nodes(), 4.0);
  r = approximate_hamiltonian(p, grid, constant, 0.0, Vec{1.0});
  CHECK(r.value == doctest::Approx((1.0 - 1.0 * 0.5) * 4.0));
}

TEST_CASE("continuous one-step value: two backward steps give the geometric sum") {
  const TimeSpaceGrid grid = unit_grid_1d(0.5);
  GameProblem p = constant_gain_model();  // f = 1, lambda = 1, G = 0
  const std::size_t J = grid.num_space_nodes();
  std::vector<double> v2(J, 0.0), v1(J), v0(J);
  for (std::size_t j = 0; j < J; ++j)
    v1[j] = approximate_hamiltonian(p, grid, v2, 0.5, grid.space_node(j)).value;
  for (std::size_t j = 0; j < J; ++j)
    v0[j] = approximate_hamiltonian(p, grid, v1, 0.0, grid.space_node(j)).value;
  for (std::size_t j = 0; j < J; ++j) {
    CHECK(v1[j] == doctest::Approx(0.5));
    CHECK(v0[j] == doctest::Approx(0.75));  // (1 - (1-lambda h)^2) / lambda
  }
}

TEST_CASE("max cost operator") {
  const TimeSpaceGrid grid = unit_grid_1d(0.25);
  const std::size_t J = grid.num_space_nodes();

  GameProblem p = zero_model();
  std::vector<double> zeros(J, 0.0);
  CHECK(max_cost_operator(p, grid, zeros, 0.0, Vec{1.0}).value == doctest::Approx(-1.0));

  // Stationary jump: reads the same point.
  p.cost_max = constant_scalar(0.1);
  std::vector<double> field(J, 5.0);
  CHECK(max_cost_operator(p, grid, field, 0.0, Vec{1.0}).value == doctest::Approx(4.9));

  // V(y) = y on [0,2], jumps +-0.5, c = 0.2 at y = 1: best is +0.5.
  p.jump_max = identity_jump();
  p.max_impulses = {{-0.5}, {0.5}};
  p.cost_max = constant_scalar(0.2);
  std::vector<double> linear(J);
  for (std::size_t j = 0; j < J; ++j) linear[j] = grid.space_node(j)[0];
  const auto r = max_cost_operator(p, grid, linear, 0.0, Vec{1.0});
  CHECK(r.value == doctest::Approx(1.3));
  CHECK(p.max_impulses[r.index][0] == 0.5);
}

TEST_CASE("min cost operator") {
  const TimeSpaceGrid grid = unit_grid_1d(0.25);
  const std::size_t J = grid.num_space_nodes();

  GameProblem p = zero_model();
  std::vector<double> zeros(J, 0.0);
  CHECK(min_cost_operator(p, grid, zeros, 0.0, Vec{1.0}).value == doctest::Approx(1.0));

  p.cost_min = constant_scalar(0.1);
  std::vector<double> field(J, 5.0);
  CHECK(min_cost_operator(p, grid, field, 0.0, Vec{1.0}).value == doctest::Approx(5.1));

  p.jump_min = identity_jump();
  p.min_impulses = {{-0.5}, {0.5}};
  p.cost_min = constant_scalar(0.2);
  std::vector<double> linear(J);
  for (std::size_t j = 0; j < J; ++j) linear[j] = grid.space_node(j)[0];
  const auto r = min_cost_operator(p, grid, linear, 0.0, Vec{1.0});
  CHECK(r.value == doctest::Approx(0.7));
  CHECK(p.min_impulses[r.index][0] == -0.5);
}

TEST_CASE("bellman map: zero is a fixed point with positive costs") {
  const TimeSpaceGrid grid = unit_grid_1d(0.25);
  const GameProblem p = zero_model();
  std::vector<double> zeros(grid.num_space_nodes(), 0.0);
  const auto r = bellman_map(p, grid, zeros, zeros, 0.0, Vec{1.0});
  CHECK(r.value == 0.0);
  CHECK(r.branch == Regime::continuous);
}

TEST_CASE("bellman map: the minimizer's branch dominates whenever it is lowest") {
  const TimeSpaceGrid grid = unit_grid_1d(0.25);
  GameProblem p = zero_model();
  p.cost_min = constant_scalar(0.01);
  p.jump_min = identity_jump();
  p.min_impulses = {{-0.5}};
  const std::size_t J = grid.num_space_nodes();
  std::vector<double> linear(J);
  for (std::size_t j = 0; j < J; ++j) linear[j] = 10.0 * grid.space_node(j)[0];

  const double phi = p.damping(grid.h);
  const auto lo = min_cost_operator(p, grid, linear, 0.0, Vec{1.5});
  const auto r = bellman_map(p, grid, linear, linear, 0.0, Vec{1.5});
  REQUIRE(phi * lo.value <
          approximate_hamiltonian(p, grid, linear, 0.0, Vec{1.5}).value);
  CHECK(r.branch == Regime::min_impulse);
  CHECK(r.value == doctest::Approx(phi * lo.value));
}

TEST_CASE("bellman map returns the terminal gain at T") {
  const TimeSpaceGrid grid = unit_grid_1d(0.25);
  GameProblem p = zero_model();
  p.terminal_gain = [](const Vec& y) { return 2.0 * y[0]; };
  std::vector<double> junk(grid.num_space_nodes(), 123.0);
  const auto r = bellman_map(p, grid, junk, junk, 1.0, Vec{0.5});
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(r.branch == Regime::terminal);
}

namespace {

// Applies the fixed-point map to a whole space-time field.
ValueField apply_map(const GameProblem& p, const TimeSpaceGrid& grid, const ValueField& v) {
  ValueField out(v.num_time_nodes, v.num_space_nodes);
  for (int i = 0; i + 1 < v.num_time_nodes; ++i) {
    const double s = grid.time_node(i);
    for (std::size_t j = 0; j < v.num_space_nodes; ++j)
      out.at(i, j) = bellman_map(p, grid, v.slice(i + 1), v.slice(i), s, grid.space_node(j)).value;
  }
  for (std::size_t j = 0; j < v.num_space_nodes; ++j)
    out.at(v.num_time_nodes - 1, j) = p.terminal_gain(grid.space_node(j));
  return out;
}

GameProblem contraction_fixture() {
  GameProblem p = zero_model();
  p.continuous_controls = {{-0.5}, {0.0}, {0.5}};
  p.dynamics = identity_jump();
  p.jump_max = identity_jump();
  p.jump_min = identity_jump();
  p.max_impulses = {{0.3}};
  p.min_impulses = {{-0.3}};
  p.cost_max = [](double, const Vec&, const Vec& u) { return 0.2 + 0.1 * std::abs(u[0]); };
  p.cost_min = [](double, const Vec&, const Vec& u) { return 0.2 + 0.1 * std::abs(u[0]); };
  p.running_gain = [](double, const Vec& y, const Vec& u) { return 0.3 * y[0] - 0.2 * u[0]; };
  p.terminal_gain = [](const Vec& y) { return 0.1 * y[0] * y[0]; };
  return p;
}

}  // namespace

TEST_CASE("contraction: ||Fv1 - Fv2|| <= max(1 - lambda h, Phi) ||v1 - v2||") {
  for (double h : {0.5, 0.1}) {
    const TimeSpaceGrid grid = build_grid(0.0, 1.0, h, {{0.0, 2.0, 9}}, BoundaryPolicy::clamp);
    const GameProblem p = contraction_fixture();
    const double factor = std::max(1.0 - p.discount * h, p.damping(h));
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uv(-5.0, 5.0);
    for (int trial = 0; trial < 40; ++trial) {
      ValueField v1(grid.num_time_nodes, grid.num_space_nodes());
      ValueField v2(grid.num_time_nodes, grid.num_space_nodes());
      for (auto& x : v1.values) x = uv(rng);
      for (auto& x : v2.values) x = uv(rng);
      const ValueField f1 = apply_map(p, grid, v1);
      const ValueField f2 = apply_map(p, grid, v2);
      const double lhs = sup_diff(f1.values, f2.values);
      const double rhs = factor * sup_diff(v1.values, v2.values);
      CHECK(lhs <= rhs + 1e-12);
    }
  }
}

TEST_CASE("monotonicity: v1 <= v2 pointwise implies F v1 <= F v2 pointwise") {
  const TimeSpaceGrid grid = unit_grid_1d(0.25, 0.0, 2.0, 9, BoundaryPolicy::clamp);
  const GameProblem p = contraction_fixture();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uv(-3.0, 3.0), bump(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    ValueField v1(grid.num_time_nodes, grid.num_space_nodes());
    ValueField v2 = v1;
    for (std::size_t k = 0; k < v1.values.size(); ++k) {
      v1.values[k] = uv(rng);
      v2.values[k] = v1.values[k] + bump(rng);
    }
    const ValueField f1 = apply_map(p, grid, v1);
    const ValueField f2 = apply_map(p, grid, v2);
    for (std::size_t k = 0; k < f1.values.size(); ++k)
      CHECK(f1.values[k] <= f2.values[k] + 1e-12);
  }
}

TEST_CASE("branch consistency: the reported branch reproduces the value") {
  const TimeSpaceGrid grid = unit_grid_1d(0.25, 0.0, 2.0, 9, BoundaryPolicy::clamp);
  const GameProblem p = contraction_fixture();
  const double phi = p.damping(grid.h);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uv(-2.0, 2.0), up(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> same(grid.num_space_nodes()), next(grid.num_space_nodes());
    for (auto& x : same) x = uv(rng);
    for (auto& x : next) x = uv(rng);
    const Vec y{up(rng)};
    const auto r = bellman_map(p, grid, next, same, 0.0, y);
    double branch_value = 0.0;
    switch (r.branch) {
      case Regime::continuous:
        branch_value = approximate_hamiltonian(p, grid, next, 0.0, y).value;
        break;
      case Regime::max_impulse:
        branch_value = phi * max_cost_operator(p, grid, same, 0.0, y).value;
        break;
      case Regime::min_impulse:
        branch_value = phi * min_cost_operator(p, grid, same, 0.0, y).value;
        break;
      case Regime::terminal:
        break;
    }
    CHECK(std::abs(r.value - branch_value) < 1e-12);
  }
}

TEST_CASE("discount consistency: backward recursion matches the closed-form sum") {
  // No admissible impulse effect: the recursion telescopes to
  // h * sum_d f (1-lambda h)^d + G (1-lambda h)^D for constant f and G.
  const double h = 0.125, lambda = 0.8, f0 = 0.7, G0 = 1.3;
  const TimeSpaceGrid grid = build_grid(0.0, 1.0, h, {{0.0, 2.0, 5}}, BoundaryPolicy::error);
  GameProblem p = constant_gain_model(f0, lambda);
  p.terminal_gain = [G0](const Vec&) { return G0; };

  const int steps = grid.num_time_nodes - 1;
  std::vector<double> field(grid.num_space_nodes(), G0);
  for (int i = steps - 1; i >= 0; --i) {
    std::vector<double> prev(grid.num_space_nodes());
    for (std::size_t j = 0; j < prev.size(); ++j)
      prev[j] = approximate_hamiltonian(p, grid, field, grid.time_node(i), grid.space_node(j)).value;
    field = prev;
  }
  double expected = 0.0, pow_d = 1.0;
  for (int d = 0; d < steps; ++d) {
    expected += h * f0 * pow_d;
    pow_d *= 1.0 - lambda * h;
  }
  expected += G0 * pow_d;
  CHECK(field[0] == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("obstacle residuals on the zero model") {
  const TimeSpaceGrid grid = unit_grid_1d(0.25);
  const GameProblem p = zero_model();
  ValueField field(grid.num_time_nodes, grid.num_space_nodes());  // all zeros
  const double phi = p.damping(grid.h);
  const auto r = obstacle_residuals(p, grid, field, 0, 4);
  CHECK(r.hjb == 0.0);
  CHECK(r.lower_gap == doctest::Approx(phi));    // v - Phi*(v - c)
  CHECK(r.upper_gap == doctest::Approx(-phi));   // v - Phi*(v + chi)
  CHECK(r.composite() == 0.0);
  CHECK_THROWS_AS(obstacle_residuals(p, grid, field, grid.num_time_nodes - 1, 0), ConfigError);
}
