#include "hjbi/nash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hjbi/operators.hpp"

namespace hjbi {

ControlInputs NashStrategy::to_controls() const {
  ControlInputs controls;
  controls.theta_timeline = theta_timeline;
  controls.max_impulses = max_impulses;
  controls.min_impulses = min_impulses;
  return controls;
}

ExtractionResult extract_equilibrium(const GameProblem& problem, const TimeSpaceGrid& grid,
                                     const SolveReport& report, const Vec& start,
                                     const SolverConfig& config) {
  if (static_cast<int>(start.size()) != problem.state_dim)
    throw ConfigError("start state dimension does not match the problem");
  if (!grid.contains(start))
    throw ConfigError("start state lies outside the space box");

  const int I = grid.num_time_nodes;
  const double h = grid.h;
  const double phi = problem.damping(h);
  const double eps = config.effective_switch_tolerance();
  const ValueField& field = report.field;

  ExtractionResult out;
  out.strategy.theta_timeline.assign(I, std::nullopt);
  out.strategy.max_impulses.push_back(
      {grid.t_start, Vec(problem.max_impulses.front().size(), 0.0), -1, true});
  Vec eta1 = config.min_placeholder.value_or(Vec(problem.min_impulses.front().size(), 0.0));
  out.strategy.min_impulses.push_back({grid.t_start, std::move(eta1), -1, true});

  out.path.states.push_back(start);
  out.path.regimes.assign(I, Regime::continuous);
  out.path.regimes.back() = Regime::terminal;
  out.path.realized_values.assign(I, std::numeric_limits<double>::quiet_NaN());

  Vec y = start;
  try {
    for (int i = 0; i + 1 < I; ++i) {
      const double s = grid.time_node(i);
      // Value of continuing this step: the recursive continuous-control
      // candidate at the exact path point. The intervention tests compare it
      // against the damped impulse-operator values on the published field;
      // minimizer first.
      const OperatorResult cont =
          approximate_hamiltonian(problem, grid, field.slice(i + 1), s, y);

      const OperatorResult mn = min_cost_operator(problem, grid, field.slice(i), s, y);
      if (cont.value > phi * mn.value + eps) {
        const Vec& eta = problem.min_impulses[mn.index];
        out.strategy.min_impulses.push_back({s, eta, mn.index, false});
        const Vec g = problem.jump_min(s, y, eta);
        for (int d = 0; d < problem.state_dim; ++d) y[d] += g[d];
        out.path.regimes[i] = Regime::min_impulse;
        out.path.realized_values[i] = phi * mn.value;
      } else {
        const OperatorResult mx = max_cost_operator(problem, grid, field.slice(i), s, y);
        if (cont.value < phi * mx.value - eps) {
          const Vec& xi = problem.max_impulses[mx.index];
          out.strategy.max_impulses.push_back({s, xi, mx.index, false});
          const Vec g = problem.jump_max(s, y, xi);
          for (int d = 0; d < problem.state_dim; ++d) y[d] += g[d];
          out.path.regimes[i] = Regime::max_impulse;
          out.path.realized_values[i] = phi * mx.value;
        } else {
          out.strategy.theta_timeline[i] = cont.index;
          const Vec b = problem.dynamics(s, y, problem.continuous_controls[cont.index]);
          for (int d = 0; d < problem.state_dim; ++d) y[d] += h * b[d];
          out.path.regimes[i] = Regime::continuous;
          out.path.realized_values[i] = cont.value;
        }
      }
      out.path.states.push_back(y);
    }
    out.path.realized_values[I - 1] = problem.terminal_gain(y);
    out.path.payoff = evaluate_payoff(problem, grid.t_start, start, out.strategy, h);
  } catch (const DomainError& e) {
    out.path.truncated = true;
    out.path.diagnostic = e.what();
    out.path.regimes.resize(out.path.states.size());
    out.path.realized_values.resize(out.path.states.size());
    out.path.payoff = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

double evaluate_payoff(const GameProblem& problem, double t0, const Vec& start,
                       const ControlInputs& controls, double h) {
  return simulate_trajectory(problem, t0, start, controls, h).payoff;
}

double evaluate_payoff(const GameProblem& problem, double t0, const Vec& start,
                       const NashStrategy& strategy, double h) {
  return evaluate_payoff(problem, t0, start, strategy.to_controls(), h);
}

namespace {

struct DeviationGenerator {
  const GameProblem& problem;
  const TimeSpaceGrid& grid;
  std::mt19937_64 rng;

  int random_index(std::size_t n) {
    return static_cast<int>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  }

  // Steps eligible for an impulse time: nodes 0..I-2.
  double random_time() { return grid.time_node(random_index(grid.num_time_nodes - 1)); }

  std::vector<Impulse>& list_of(ControlInputs& c, ImpulseSide side) {
    return side == ImpulseSide::max_player ? c.max_impulses : c.min_impulses;
  }
  const std::vector<Vec>& grid_of(ImpulseSide side) {
    return side == ImpulseSide::max_player ? problem.max_impulses : problem.min_impulses;
  }

  std::vector<int> real_entries(const std::vector<Impulse>& list) {
    std::vector<int> idx;
    for (int k = 0; k < static_cast<int>(list.size()); ++k)
      if (!list[k].placeholder) idx.push_back(k);
    return idx;
  }

  // Returns the label of the deviation actually applied.
  std::string apply(ControlInputs& dev, ImpulseSide side, int kind) {
    auto& list = list_of(dev, side);
    const auto& values = grid_of(side);
    const auto real = real_entries(list);

    const bool can_touch = !real.empty();
    if (side == ImpulseSide::max_player && kind == 0) {
      // Perturb the continuous timeline at one step.
      const int step = random_index(grid.num_time_nodes - 1);
      if (static_cast<std::size_t>(step) >= dev.theta_timeline.size())
        dev.theta_timeline.resize(grid.num_time_nodes);
      dev.theta_timeline[step] = random_index(problem.continuous_controls.size());
      return "theta_perturb";
    }
    const int action = can_touch ? kind % 4 : 0;
    switch (action) {
      case 1: {  // remove
        list.erase(list.begin() + real[random_index(real.size())]);
        return "impulse_remove";
      }
      case 2: {  // shift by one step
        Impulse& imp = list[real[random_index(real.size())]];
        const double shifted = imp.time + (rng() % 2 ? grid.h : -grid.h);
        imp.time = std::clamp(shifted, grid.t_start, grid.time_node(grid.num_time_nodes - 2));
        return "impulse_shift";
      }
      case 3: {  // resize from the control grid
        Impulse& imp = list[real[random_index(real.size())]];
        imp.grid_index = random_index(values.size());
        imp.value = values[imp.grid_index];
        return "impulse_resize";
      }
      default: {  // add
        Impulse imp;
        imp.time = random_time();
        imp.grid_index = random_index(values.size());
        imp.value = values[imp.grid_index];
        imp.placeholder = false;
        auto pos = std::upper_bound(list.begin(), list.end(), imp.time,
                                    [](double t, const Impulse& e) { return t < e.time; });
        list.insert(pos, std::move(imp));
        return "impulse_add";
      }
    }
  }
};

}  // namespace

NEReport verify_equilibrium(const GameProblem& problem, const TimeSpaceGrid& grid,
                            const SolveReport& report, const Vec& start, int deviation_budget,
                            std::uint64_t seed, double tol_ne, const SolverConfig& config) {
  const ExtractionResult eq = extract_equilibrium(problem, grid, report, start, config);
  if (eq.path.truncated)
    throw DomainError("equilibrium path truncated: " + eq.path.diagnostic, -1, 0.0);

  NEReport ne;
  ne.tolerance = tol_ne;
  ne.deviations_per_side = deviation_budget;
  ne.equilibrium_payoff = eq.path.payoff;
  ne.value_at_start = interpolate(report.field.slice(0), grid, start);
  ne.value_match_error = std::abs(ne.equilibrium_payoff - ne.value_at_start);
  ne.value_match_ok = ne.value_match_error <= tol_ne;

  const ControlInputs base = eq.strategy.to_controls();
  DeviationGenerator gen{problem, grid, std::mt19937_64(seed)};

  ne.worst_max_improvement = -std::numeric_limits<double>::infinity();
  ne.worst_min_improvement = -std::numeric_limits<double>::infinity();
  const int kinds_max = 5;  // theta + four impulse edits
  const int kinds_min = 4;
  for (int side_idx = 0; side_idx < 2; ++side_idx) {
    const ImpulseSide side = side_idx == 0 ? ImpulseSide::max_player : ImpulseSide::min_player;
    for (int d = 0; d < deviation_budget; ++d) {
      ControlInputs dev = base;
      const int kind = d % (side == ImpulseSide::max_player ? kinds_max : kinds_min);
      const std::string label =
          gen.apply(dev, side, side == ImpulseSide::max_player ? kind : kind + 1);
      const double payoff = evaluate_payoff(problem, grid.t_start, start, dev, grid.h);
      const double improvement = side == ImpulseSide::max_player
                                     ? payoff - ne.equilibrium_payoff
                                     : ne.equilibrium_payoff - payoff;
      DeviationRecord rec{label, payoff, improvement};
      if (side == ImpulseSide::max_player) {
        if (improvement > ne.worst_max_improvement) {
          ne.worst_max_improvement = improvement;
          ne.worst_max_deviation = rec;
        }
      } else if (improvement > ne.worst_min_improvement) {
        ne.worst_min_improvement = improvement;
        ne.worst_min_deviation = rec;
      }
    }
  }
  if (deviation_budget <= 0) {
    ne.worst_max_improvement = 0.0;
    ne.worst_min_improvement = 0.0;
  }

  ne.pass = ne.value_match_ok && ne.worst_max_improvement <= tol_ne &&
            ne.worst_min_improvement <= tol_ne;
  return ne;
}

}  // namespace hjbi
