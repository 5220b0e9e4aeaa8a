#pragma once

// Shared test fixtures: canonical small game instances, a seeded random
// instance generator, and the independent brute-force reference solver used
// as the oracle for the backward sweep.

#include <cmath>
#include <cstdint>
#include <random>

#include "hjbi/game_model.hpp"
#include "hjbi/grid.hpp"
#include "hjbi/operators.hpp"
#include "hjbi/solver.hpp"

namespace hjbi::testing {

inline VectorFn constant_dynamics(double value) {
  return [value](double, const Vec& y, const Vec&) { return Vec(y.size(), value); };
}

inline VectorFn zero_vector_fn() {
  return [](double, const Vec& y, const Vec&) { return Vec(y.size(), 0.0); };
}

inline VectorFn identity_jump() {
  return [](double, const Vec& y, const Vec& u) {
    Vec out(y.size(), 0.0);
    for (std::size_t i = 0; i < out.size() && i < u.size(); ++i) out[i] = u[i];
    return out;
  };
}

inline ScalarFn constant_scalar(double value) {
  return [value](double, const Vec&, const Vec&) { return value; };
}

inline DampingFn exp_damping(double lambda) {
  return [lambda](double h) { return std::exp(-lambda * h); };
}

// b=0, f=0, c=chi=1, g=0, G=0: the value field is identically zero.
inline GameProblem zero_model() {
  GameProblem p;
  p.state_dim = 1;
  p.continuous_controls = {{0.0}};
  p.max_impulses = {{1.0}};
  p.min_impulses = {{-1.0}};
  p.dynamics = zero_vector_fn();
  p.jump_max = zero_vector_fn();
  p.jump_min = zero_vector_fn();
  p.running_gain = constant_scalar(0.0);
  p.cost_max = constant_scalar(1.0);
  p.cost_min = constant_scalar(1.0);
  p.terminal_gain = [](const Vec&) { return 0.0; };
  p.discount = 1.0;
  p.t_start = 0.0;
  p.t_end = 1.0;
  p.damping = exp_damping(1.0);
  return p;
}

// f constant, impulses priced out: closed-form discrete discounted sum.
inline GameProblem constant_gain_model(double f0 = 1.0, double lambda = 1.0) {
  GameProblem p = zero_model();
  p.running_gain = constant_scalar(f0);
  p.cost_max = constant_scalar(1e6);
  p.cost_min = constant_scalar(1e6);
  p.discount = lambda;
  p.damping = exp_damping(lambda);
  return p;
}

inline TimeSpaceGrid unit_grid_1d(double h = 0.25, double lo = 0.0, double hi = 2.0,
                                  int count = 9,
                                  BoundaryPolicy boundary = BoundaryPolicy::error) {
  return build_grid(0.0, 1.0, h, {{lo, hi, count}}, boundary);
}

struct Instance {
  GameProblem problem;
  TimeSpaceGrid grid;
  Vec start;
};

// Small randomized 1D instance within the brute-force budget: 5 time nodes,
// 9 space nodes, at most 3 controls per grid, clamped interpolation.
inline Instance random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  Instance inst;
  GameProblem& p = inst.problem;
  p.state_dim = 1;
  p.t_start = 0.0;
  p.t_end = 1.0;
  p.discount = uniform(0.6, 1.4);
  p.damping = exp_damping(p.discount);

  const int n_theta = 2 + static_cast<int>(rng() % 2);
  for (int k = 0; k < n_theta; ++k) p.continuous_controls.push_back({uniform(-1.0, 1.0)});
  const int n_xi = 1 + static_cast<int>(rng() % 2);
  for (int k = 0; k < n_xi; ++k) p.max_impulses.push_back({uniform(0.3, 0.9)});
  const int n_eta = 1 + static_cast<int>(rng() % 2);
  for (int k = 0; k < n_eta; ++k) p.min_impulses.push_back({uniform(-0.9, -0.3)});

  const double a0 = uniform(-0.4, 0.4), a1 = uniform(-0.5, 0.5), ay = uniform(-0.2, 0.2);
  p.dynamics = [a0, a1, ay](double, const Vec& y, const Vec& u) {
    return Vec{a0 + a1 * u[0] + ay * y[0]};
  };
  p.jump_max = identity_jump();
  p.jump_min = identity_jump();

  const double f0 = uniform(-0.5, 0.5), f1 = uniform(-0.6, 0.6), f2 = uniform(-0.4, 0.4),
               f3 = uniform(-0.3, 0.3);
  p.running_gain = [f0, f1, f2, f3](double, const Vec& y, const Vec& u) {
    return f0 + f1 * u[0] + f2 * y[0] + f3 * u[0] * y[0];
  };
  // Costs low enough (and terminal slopes steep enough) that the impulse
  // obstacles bind on part of the grid.
  const double c0 = uniform(0.05, 0.15);
  p.cost_max = [c0](double, const Vec& y, const Vec& u) {
    return c0 + 0.05 * std::abs(u[0]) + 0.02 * std::abs(y[0]);
  };
  const double x0 = uniform(0.05, 0.15);
  p.cost_min = [x0](double, const Vec& y, const Vec& u) {
    return x0 + 0.05 * std::abs(u[0]) + 0.02 * std::abs(y[0]);
  };
  const double g0 = uniform(-0.5, 0.5), g1 = uniform(-1.5, 1.5), g2 = uniform(-0.4, 0.4);
  p.terminal_gain = [g0, g1, g2](const Vec& y) {
    return g0 + g1 * y[0] + g2 * y[0] * y[0];
  };

  inst.grid = build_grid(0.0, 1.0, 0.25, {{-2.0, 2.0, 9}}, BoundaryPolicy::clamp);
  inst.start = {0.0};
  return inst;
}

// Lattice-aligned audit instance: drift and jumps move the state by whole
// grid cells, the start state is a node, and impulses are priced out, so the
// optimal path stays on nodes and interpolation is exact along it.
inline Instance lattice_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  Instance inst;
  GameProblem& p = inst.problem;
  p.state_dim = 1;
  p.t_start = 0.0;
  p.t_end = 1.0;
  p.discount = 1.0;
  p.damping = exp_damping(p.discount);

  // h = 0.25, cell width 0.5: drift values {-2, 0, 2} move one cell per step.
  p.continuous_controls = {{-2.0}, {0.0}, {2.0}};
  p.max_impulses = {{0.5}, {1.0}};
  p.min_impulses = {{-0.5}, {-1.0}};
  p.dynamics = identity_jump();
  p.jump_max = identity_jump();
  p.jump_min = identity_jump();

  const double fy = uniform(-0.4, 0.4), fu = uniform(-0.3, 0.3), fq = uniform(-0.2, 0.0);
  p.running_gain = [fy, fu, fq](double, const Vec& y, const Vec& u) {
    return fy * y[0] + fu * u[0] + fq * u[0] * u[0];
  };
  p.cost_max = constant_scalar(1e6);
  p.cost_min = constant_scalar(1e6);
  const double gy = uniform(-0.5, 0.5);
  p.terminal_gain = [gy](const Vec& y) { return gy * y[0]; };

  inst.grid = build_grid(0.0, 1.0, 0.25, {{-8.0, 8.0, 33}}, BoundaryPolicy::clamp);
  inst.start = {0.0};
  return inst;
}

// Independent reference solver: cold-started Jacobi iteration of the nested
// min/max recursion at every slice, exhaustive over the control grids, same
// interpolation operator. No policy iteration, no warm starts.
inline ValueField oracle_solve(const GameProblem& p, const TimeSpaceGrid& grid, double tol,
                               int max_sweeps = 100000) {
  const int I = grid.num_time_nodes;
  const std::size_t J = grid.num_space_nodes();
  const double h = grid.h;
  const double keep = 1.0 - p.discount * h;
  const double phi = p.damping(h);

  ValueField field(I, J);
  std::vector<Vec> nodes(J);
  for (std::size_t j = 0; j < J; ++j) nodes[j] = grid.space_node(j);
  for (std::size_t j = 0; j < J; ++j) field.at(I - 1, j) = p.terminal_gain(nodes[j]);

  std::vector<double> work(J), next(J);
  for (int i = I - 2; i >= 0; --i) {
    const double s = grid.time_node(i);
    std::vector<double> cont(J);
    for (std::size_t j = 0; j < J; ++j) {
      double best = -1e300;
      for (const auto& theta : p.continuous_controls) {
        const Vec b = p.dynamics(s, nodes[j], theta);
        Vec target = nodes[j];
        for (int d = 0; d < p.state_dim; ++d) target[d] += h * b[d];
        best = std::max(best, keep * interpolate(field.slice(i + 1), grid, target) +
                                  h * p.running_gain(s, nodes[j], theta));
      }
      cont[j] = best;
    }

    std::fill(work.begin(), work.end(), 0.0);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      for (std::size_t j = 0; j < J; ++j) {
        double hi = -1e300;
        for (const auto& xi : p.max_impulses) {
          const Vec g = p.jump_max(s, nodes[j], xi);
          Vec target = nodes[j];
          for (int d = 0; d < p.state_dim; ++d) target[d] += g[d];
          hi = std::max(hi, interpolate(work, grid, target) - p.cost_max(s, nodes[j], xi));
        }
        double lo = 1e300;
        for (const auto& eta : p.min_impulses) {
          const Vec g = p.jump_min(s, nodes[j], eta);
          Vec target = nodes[j];
          for (int d = 0; d < p.state_dim; ++d) target[d] += g[d];
          lo = std::min(lo, interpolate(work, grid, target) + p.cost_min(s, nodes[j], eta));
        }
        next[j] = std::min(std::max(cont[j], phi * hi), phi * lo);
      }
      const double delta = sup_diff(next, work);
      work.swap(next);
      if (delta < tol) break;
    }
    for (std::size_t j = 0; j < J; ++j) field.at(i, j) = work[j];
  }
  return field;
}

}  // namespace hjbi::testing
