#include "hjbi/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace hjbi {

namespace {

// Precomputed jump targets and costs for one slice: target[j*K + k] is the
// post-jump point for node j under impulse k; they do not depend on the
// iterating field.
struct ImpulseTable {
  std::size_t num_nodes = 0;
  int num_controls = 0;
  std::vector<Vec> targets;
  std::vector<double> costs;
};

ImpulseTable build_impulse_table(const GameProblem& problem, const TimeSpaceGrid& grid, int slice,
                                 ImpulseSide side) {
  const double s = grid.time_node(slice);
  const auto& impulses =
      side == ImpulseSide::min_player ? problem.min_impulses : problem.max_impulses;
  const auto& jump = side == ImpulseSide::min_player ? problem.jump_min : problem.jump_max;
  const auto& cost = side == ImpulseSide::min_player ? problem.cost_min : problem.cost_max;

  ImpulseTable table;
  table.num_nodes = grid.num_space_nodes();
  table.num_controls = static_cast<int>(impulses.size());
  table.targets.resize(table.num_nodes * impulses.size());
  table.costs.resize(table.num_nodes * impulses.size());
  for (std::size_t j = 0; j < table.num_nodes; ++j) {
    const Vec y = grid.space_node(j);
    for (std::size_t k = 0; k < impulses.size(); ++k) {
      const Vec g = jump(s, y, impulses[k]);
      Vec target = y;
      for (int d = 0; d < problem.state_dim; ++d) target[d] += g[d];
      table.targets[j * impulses.size() + k] = std::move(target);
      table.costs[j * impulses.size() + k] = cost(s, y, impulses[k]);
    }
  }
  return table;
}

void warn(std::vector<std::string>* warnings, const std::string& message) {
  if (warnings) warnings->push_back(message);
}

}  // namespace

ValueIterationResult value_iteration(const GameProblem& problem, const TimeSpaceGrid& grid,
                                     int slice, ImpulseSide side,
                                     const std::vector<int>* fixed_policy,
                                     std::span<const double> initial, const SolverConfig& config,
                                     std::vector<std::string>* warnings,
                                     std::vector<std::vector<double>>* iterate_history) {
  const double phi = problem.damping(grid.h);
  if (!(phi > 0.0 && phi < 1.0))
    throw ConfigError("damping Phi(h) must lie in (0,1), got " + std::to_string(phi));

  const ImpulseTable table = build_impulse_table(problem, grid, slice, side);
  const std::size_t J = table.num_nodes;
  const int K = table.num_controls;
  const double sign = side == ImpulseSide::min_player ? 1.0 : -1.0;

  if (fixed_policy) {
    if (fixed_policy->size() != J) throw ConfigError("fixed policy size does not match grid");
    for (int p : *fixed_policy)
      if (p < 0 || p >= K) throw ConfigError("fixed policy index out of range");
  }

  ValueIterationResult result;
  result.values.assign(initial.begin(), initial.end());
  std::vector<double> next(J);
  if (iterate_history) iterate_history->push_back(result.values);

  double delta = std::numeric_limits<double>::infinity();
  do {
    ++result.iterations;
    for (std::size_t j = 0; j < J; ++j) {
      if (fixed_policy) {
        const std::size_t e = j * K + static_cast<std::size_t>((*fixed_policy)[j]);
        next[j] = phi * (interpolate(result.values, grid, table.targets[e]) + sign * table.costs[e]);
      } else if (side == ImpulseSide::min_player) {
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
          const std::size_t e = j * K + k;
          best = std::min(best,
                          interpolate(result.values, grid, table.targets[e]) + table.costs[e]);
        }
        next[j] = phi * best;
      } else {
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
          const std::size_t e = j * K + k;
          best = std::max(best,
                          interpolate(result.values, grid, table.targets[e]) - table.costs[e]);
        }
        next[j] = phi * best;
      }
    }
    delta = sup_diff(next, result.values);
    result.values.swap(next);
    if (iterate_history) iterate_history->push_back(result.values);
  } while (delta >= config.tolerance && result.iterations < config.max_iterations);

  if (delta >= config.tolerance) {
    std::ostringstream msg;
    msg << "value iteration hit max_iterations=" << config.max_iterations << " at slice " << slice
        << " (last sweep moved " << delta << ")";
    warn(warnings, msg.str());
  }
  return result;
}

namespace {

PolicyIterationResult policy_iteration_impl(const GameProblem& problem, const TimeSpaceGrid& grid,
                                            int slice, ImpulseSide side,
                                            std::vector<int> policy,
                                            std::span<const double> initial_values,
                                            const SolverConfig& config,
                                            std::vector<std::string>* warnings,
                                            std::vector<std::vector<double>>* outer_history) {
  const double phi = problem.damping(grid.h);
  const ImpulseTable table = build_impulse_table(problem, grid, slice, side);
  const std::size_t J = table.num_nodes;
  const int K = table.num_controls;
  const double sign = side == ImpulseSide::min_player ? 1.0 : -1.0;

  if (policy.empty()) policy.assign(J, 0);
  if (policy.size() != J) throw ConfigError("initial policy size does not match grid");
  for (int p : policy)
    if (p < 0 || p >= K) throw ConfigError("initial policy index out of range");

  PolicyIterationResult result;
  result.policy = std::move(policy);
  result.values.assign(initial_values.begin(), initial_values.end());

  std::vector<int> improved_policy(J);
  std::vector<double> improved_values(J);
  while (true) {
    ++result.outer_iterations;

    auto eval = value_iteration(problem, grid, slice, side, &result.policy, result.values, config,
                                warnings);
    result.values = std::move(eval.values);
    result.value_iterations += eval.iterations;
    if (outer_history) outer_history->push_back(result.values);

    for (std::size_t j = 0; j < J; ++j) {
      int best_k = 0;
      double best = std::numeric_limits<double>::infinity() * sign;
      for (int k = 0; k < K; ++k) {
        const std::size_t e = j * K + k;
        const double candidate =
            phi * (interpolate(result.values, grid, table.targets[e]) + sign * table.costs[e]);
        const bool better = side == ImpulseSide::min_player ? candidate < best : candidate > best;
        if (better) {
          best = candidate;
          best_k = k;
        }
      }
      improved_policy[j] = best_k;
      improved_values[j] = best;
    }

    if (improved_policy == result.policy) break;
    if (result.outer_iterations >= config.max_iterations) {
      std::ostringstream msg;
      msg << "policy iteration hit max_iterations=" << config.max_iterations << " at slice "
          << slice;
      warn(warnings, msg.str());
      break;
    }
    result.policy = improved_policy;
    result.values = improved_values;
  }
  return result;
}

}  // namespace

PolicyIterationResult policy_iteration_min(const GameProblem& problem, const TimeSpaceGrid& grid,
                                           int slice, std::vector<int> initial_policy,
                                           std::span<const double> initial_values,
                                           const SolverConfig& config,
                                           std::vector<std::string>* warnings,
                                           std::vector<std::vector<double>>* outer_history) {
  return policy_iteration_impl(problem, grid, slice, ImpulseSide::min_player,
                               std::move(initial_policy), initial_values, config, warnings,
                               outer_history);
}

PolicyIterationResult policy_iteration_max(const GameProblem& problem, const TimeSpaceGrid& grid,
                                           int slice, std::vector<int> initial_policy,
                                           std::span<const double> initial_values,
                                           const SolverConfig& config,
                                           std::vector<std::string>* warnings,
                                           std::vector<std::vector<double>>* outer_history) {
  return policy_iteration_impl(problem, grid, slice, ImpulseSide::max_player,
                               std::move(initial_policy), initial_values, config, warnings,
                               outer_history);
}

SolveReport backward_sweep(const GameProblem& problem, const TimeSpaceGrid& grid,
                           const SolverConfig& config) {
  const auto clock_start = std::chrono::steady_clock::now();
  check_structure(problem);
  if (!(config.tolerance > 0.0)) throw ConfigError("solver tolerance must be positive");
  if (config.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");

  const double lh = problem.discount * grid.h;
  if (!(lh < 1.0))
    throw ConfigError("backward sweep requires lambda*h < 1, got " + std::to_string(lh));
  if (lh > 0.5 + 1e-12 && !config.allow_large_lambda_h)
    throw ConfigError("lambda*h = " + std::to_string(lh) +
                      " exceeds the default 1/2 guard; set allow_large_lambda_h to override");
  const double phi = problem.damping(grid.h);
  if (!(phi > 0.0 && phi < 1.0))
    throw ConfigError("damping Phi(h) must lie in (0,1), got " + std::to_string(phi));

  const int I = grid.num_time_nodes;
  const std::size_t J = grid.num_space_nodes();

  SolveReport report;
  report.field = ValueField(I, J);
  report.candidate_continuous.assign(static_cast<std::size_t>(I) * J, 0.0);
  report.candidate_min.assign(static_cast<std::size_t>(I) * J, 0.0);
  report.candidate_max.assign(static_cast<std::size_t>(I) * J, 0.0);
  if (grid.boundary == BoundaryPolicy::clamp)
    report.warnings.push_back("boundary policy clamp: interpolation targets may be projected");

  std::vector<Vec> nodes(J);
  for (std::size_t j = 0; j < J; ++j) nodes[j] = grid.space_node(j);

  for (std::size_t j = 0; j < J; ++j) {
    const double g = problem.terminal_gain(nodes[j]);
    const std::size_t flat = report.field.flat(I - 1, j);
    report.field.values[flat] = g;
    report.field.regime[flat] = Regime::terminal;
    report.candidate_continuous[flat] = g;
    report.candidate_min[flat] = g;
    report.candidate_max[flat] = g;
  }

  std::vector<double> step1(J);
  std::vector<double> work(J), next(J);
  std::vector<Regime> branch(J);
  for (int i = I - 2; i >= 0; --i) {
    const double s = grid.time_node(i);
    SliceStats stats;
    stats.slice = i;

    // Step 1: continuous-control recursion against the frozen next slice.
    for (std::size_t j = 0; j < J; ++j) {
      const auto r = approximate_hamiltonian(problem, grid, report.field.slice(i + 1), s, nodes[j]);
      step1[j] = r.value;
      report.field.theta_index[report.field.flat(i, j)] = r.index;
    }

    // Step 2: minimizer intervention value.
    auto pi_min =
        policy_iteration_min(problem, grid, i, {}, step1, config, &report.warnings);
    stats.policy_outer_min = pi_min.outer_iterations;
    stats.value_iterations_min = pi_min.value_iterations;

    // Step 3: maximizer intervention value.
    auto pi_max =
        policy_iteration_max(problem, grid, i, {}, step1, config, &report.warnings);
    stats.policy_outer_max = pi_max.outer_iterations;
    stats.value_iterations_max = pi_max.value_iterations;

    for (std::size_t j = 0; j < J; ++j) {
      const std::size_t flat = report.field.flat(i, j);
      report.candidate_continuous[flat] = step1[j];
      report.candidate_min[flat] = pi_min.values[j];
      report.candidate_max[flat] = pi_max.values[j];
      report.field.eta_index[flat] = pi_min.policy[j];
      report.field.xi_index[flat] = pi_max.policy[j];
    }

    // Reconcile the published slice through the fixed-point map; Step-1
    // values are constant in this loop, the impulse operators read the
    // iterating slice.
    const ImpulseTable table_min = build_impulse_table(problem, grid, i, ImpulseSide::min_player);
    const ImpulseTable table_max = build_impulse_table(problem, grid, i, ImpulseSide::max_player);
    work = step1;
    std::vector<double> deltas;
    double delta = std::numeric_limits<double>::infinity();
    do {
      ++stats.reconcile_iterations;
      for (std::size_t j = 0; j < J; ++j) {
        double hi = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < table_max.num_controls; ++k) {
          const std::size_t e = j * table_max.num_controls + k;
          hi = std::max(hi, interpolate(work, grid, table_max.targets[e]) - table_max.costs[e]);
        }
        double lo = std::numeric_limits<double>::infinity();
        for (int k = 0; k < table_min.num_controls; ++k) {
          const std::size_t e = j * table_min.num_controls + k;
          lo = std::min(lo, interpolate(work, grid, table_min.targets[e]) + table_min.costs[e]);
        }
        double value = step1[j];
        Regime reg = Regime::continuous;
        if (phi * hi > value) {
          value = phi * hi;
          reg = Regime::max_impulse;
        }
        if (phi * lo < value) {
          value = phi * lo;
          reg = Regime::min_impulse;
        }
        next[j] = value;
        branch[j] = reg;
      }
      delta = sup_diff(next, work);
      work.swap(next);
      if (config.record_convergence) deltas.push_back(delta);
    } while (delta >= config.tolerance && stats.reconcile_iterations < config.max_iterations);
    if (delta >= config.tolerance) {
      std::ostringstream msg;
      msg << "slice reconciliation hit max_iterations=" << config.max_iterations << " at slice "
          << i << " (last sweep moved " << delta << ")";
      report.warnings.push_back(msg.str());
    }

    for (std::size_t j = 0; j < J; ++j) {
      const std::size_t flat = report.field.flat(i, j);
      report.field.values[flat] = work[j];
      report.field.regime[flat] = branch[j];
    }
    if (config.record_convergence) report.convergence_history.push_back(std::move(deltas));

    double residual = 0.0;
    for (std::size_t j = 0; j < J; ++j)
      residual = std::max(residual,
                          std::abs(obstacle_residuals(problem, grid, report.field, i, j).composite()));
    stats.residual = residual;
    report.max_residual = std::max(report.max_residual, residual);
    report.slices.push_back(stats);
  }

  std::reverse(report.slices.begin(), report.slices.end());
  for (const auto& w : report.warnings)
    if (w.find("max_iterations") != std::string::npos) report.converged = false;

  // Uniform-bound audit: flag, never fail, a field exceeding the sampled
  // ||f||/lambda + ||G|| budget.
  double sup_f = 0.0, sup_g = 0.0;
  for (int i = 0; i < I; ++i)
    for (std::size_t j = 0; j < J; ++j)
      for (const auto& theta : problem.continuous_controls)
        sup_f = std::max(sup_f,
                         std::abs(problem.running_gain(grid.time_node(i), nodes[j], theta)));
  for (std::size_t j = 0; j < J; ++j)
    sup_g = std::max(sup_g, std::abs(problem.terminal_gain(nodes[j])));
  const double budget = sup_f / problem.discount + sup_g;
  const double sup_v = sup_norm(report.field.values);
  if (sup_v > budget + config.tolerance) {
    std::ostringstream msg;
    msg << "value field sup " << sup_v << " exceeds the uniform bound budget " << budget;
    report.warnings.push_back(msg.str());
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return report;
}

RefinementStudy refinement_study(const GameProblem& problem, const std::vector<AxisSpec>& space_box,
                                 BoundaryPolicy boundary, const std::vector<double>& h_list,
                                 const SolverConfig& config, const Vec* probe_point) {
  if (h_list.empty()) throw ConfigError("refinement study needs a non-empty h list");
  for (std::size_t k = 1; k < h_list.size(); ++k)
    if (!(h_list[k] < h_list[k - 1]))
      throw ConfigError("refinement h list must be strictly decreasing");
  const double h_fine = h_list.back();
  for (double h : h_list) {
    const double ratio = h / h_fine;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      throw ConfigError("every refinement step must share time nodes with the finest step");
  }

  RefinementStudy study;
  std::vector<SolveReport> reports;
  reports.reserve(h_list.size());
  std::vector<TimeSpaceGrid> grids;
  for (double h : h_list) {
    grids.push_back(build_grid(problem.t_start, problem.t_end, h, space_box, boundary));
    reports.push_back(backward_sweep(problem, grids.back(), config));
    for (const auto& w : reports.back().warnings) study.warnings.push_back(w);
  }

  const TimeSpaceGrid& fine_grid = grids.back();
  const ValueField& fine = reports.back().field;
  const std::size_t J = fine_grid.num_space_nodes();

  for (std::size_t r = 0; r < h_list.size(); ++r) {
    RefinementRow row;
    row.h = h_list[r];
    const long stride = std::lround(h_list[r] / h_fine);
    double diff = 0.0;
    for (int i = 0; i < grids[r].num_time_nodes; ++i) {
      const int fi = static_cast<int>(i * stride);
      for (std::size_t j = 0; j < J; ++j)
        diff = std::max(diff, std::abs(reports[r].field.at(i, j) - fine.at(fi, j)));
    }
    row.sup_diff = diff;
    for (const auto& st : reports[r].slices)
      row.iterations += st.value_iterations_min + st.value_iterations_max + st.reconcile_iterations;
    if (probe_point)
      row.value_at_probe = interpolate(reports[r].field.slice(0), grids[r], *probe_point);
    else
      row.value_at_probe = reports[r].field.at(0, J / 2);
    study.rows.push_back(row);
  }

  for (std::size_t r = 1; r + 1 < study.rows.size(); ++r) {
    if (study.rows[r].sup_diff > study.rows[r - 1].sup_diff * (1.0 + 1e-9))
      study.monotone_trend = false;
  }
  return study;
}

}  // namespace hjbi
