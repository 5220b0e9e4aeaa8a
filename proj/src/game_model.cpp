#include "hjbi/game_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hjbi {

namespace {

std::string fmt_vec(const Vec& v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  os << ")";
  return os.str();
}

std::string witness(double s, const Vec& y, const Vec* u = nullptr) {
  std::ostringstream os;
  os << "s=" << s << " y=" << fmt_vec(y);
  if (u) os << " u=" << fmt_vec(*u);
  return os.str();
}

bool is_zero(const Vec& v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

double inf_norm(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double eucl_norm_diff(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

void check_structure(const GameProblem& problem) {
  if (problem.state_dim < 1) throw ConfigError("state_dim must be positive");
  if (!(problem.discount > 0.0)) throw ConfigError("discount lambda must be positive");
  if (!(problem.t_end > problem.t_start)) throw ConfigError("horizon must satisfy T > t");
  if (problem.continuous_controls.empty())
    throw ConfigError("continuous control grid must be non-empty");
  if (problem.max_impulses.empty() || problem.min_impulses.empty())
    throw ConfigError("impulse control grids must be non-empty");
  for (const auto& xi : problem.max_impulses)
    if (is_zero(xi)) throw ConfigError("max impulse grid contains the zero vector");
  for (const auto& eta : problem.min_impulses)
    if (is_zero(eta)) throw ConfigError("min impulse grid contains the zero vector");
  if (!problem.dynamics || !problem.jump_max || !problem.jump_min || !problem.running_gain ||
      !problem.cost_max || !problem.cost_min || !problem.terminal_gain || !problem.damping)
    throw ConfigError("game problem has unset model functions");
}

AssumptionReport validate_assumptions(const GameProblem& problem, const TimeSpaceGrid& sample_grid,
                                      double cost_tolerance) {
  if (sample_grid.dim() != problem.state_dim)
    throw ConfigError("sample grid dimension " + std::to_string(sample_grid.dim()) +
                      " does not match problem state_dim " + std::to_string(problem.state_dim));

  AssumptionReport report;
  report.cost_infimum = std::numeric_limits<double>::infinity();

  const int I = sample_grid.num_time_nodes;
  const std::size_t J = sample_grid.num_space_nodes();

  const double lh = problem.discount * sample_grid.h;
  if (!(lh < 1.0))
    report.violations.push_back({"lambda_h", "lambda*h = " + std::to_string(lh) + " >= 1"});
  const double phi = problem.damping(sample_grid.h);
  if (!(phi > 0.0 && phi < 1.0))
    report.violations.push_back(
        {"phi_range", "Phi(" + std::to_string(sample_grid.h) + ") = " + std::to_string(phi)});

  for (const auto& xi : problem.max_impulses)
    if (is_zero(xi)) report.violations.push_back({"nonzero_impulse", "xi=" + fmt_vec(xi)});
  for (const auto& eta : problem.min_impulses)
    if (is_zero(eta)) report.violations.push_back({"nonzero_impulse", "eta=" + fmt_vec(eta)});

  // Cache node coordinates once; sample grids are small.
  std::vector<Vec> nodes(J);
  for (std::size_t j = 0; j < J; ++j) nodes[j] = sample_grid.space_node(j);

  bool hcchi_flagged = false, hb_flagged = false, hf_flagged = false;
  for (int i = 0; i < I; ++i) {
    const double s = sample_grid.time_node(i);
    for (std::size_t j = 0; j < J; ++j) {
      const Vec& y = nodes[j];
      for (const auto& theta : problem.continuous_controls) {
        const Vec b = problem.dynamics(s, y, theta);
        const double f = problem.running_gain(s, y, theta);
        const double bn = inf_norm(b);
        if (!std::isfinite(bn)) {
          if (!hb_flagged) report.violations.push_back({"H_b", witness(s, y, &theta)});
          hb_flagged = true;
        } else {
          report.sup_dynamics = std::max(report.sup_dynamics, bn);
        }
        if (!std::isfinite(f)) {
          if (!hf_flagged) report.violations.push_back({"H_f", witness(s, y, &theta)});
          hf_flagged = true;
        } else {
          report.sup_running_gain = std::max(report.sup_running_gain, std::abs(f));
        }
      }
      for (const auto& xi : problem.max_impulses) {
        const double c = problem.cost_max(s, y, xi);
        report.cost_infimum = std::min(report.cost_infimum, c);
        if (!(c > cost_tolerance) && !hcchi_flagged) {
          report.violations.push_back({"H_c_chi", witness(s, y, &xi) + " c=" + std::to_string(c)});
          hcchi_flagged = true;
        }
      }
      for (const auto& eta : problem.min_impulses) {
        const double chi = problem.cost_min(s, y, eta);
        report.cost_infimum = std::min(report.cost_infimum, chi);
        if (!(chi > cost_tolerance) && !hcchi_flagged) {
          report.violations.push_back(
              {"H_c_chi", witness(s, y, &eta) + " chi=" + std::to_string(chi)});
          hcchi_flagged = true;
        }
      }
    }
  }
  report.bound_m_estimate = std::max(report.sup_dynamics, report.sup_running_gain);

  // No-terminal-impulse condition of H_G, enumerated over the impulse grids.
  const double T = problem.t_end;
  const double term_tol = 1e-9;
  for (std::size_t j = 0; j < J; ++j) {
    const Vec& y = nodes[j];
    const double g0 = problem.terminal_gain(y);
    double best_max = -std::numeric_limits<double>::infinity();
    for (const auto& xi : problem.max_impulses) {
      Vec jumped = y;
      const Vec g = problem.jump_max(T, y, xi);
      for (int d = 0; d < problem.state_dim; ++d) jumped[d] += g[d];
      best_max = std::max(best_max, problem.terminal_gain(jumped) - problem.cost_max(T, y, xi));
    }
    double best_min = std::numeric_limits<double>::infinity();
    for (const auto& eta : problem.min_impulses) {
      Vec jumped = y;
      const Vec g = problem.jump_min(T, y, eta);
      for (int d = 0; d < problem.state_dim; ++d) jumped[d] += g[d];
      best_min = std::min(best_min, problem.terminal_gain(jumped) + problem.cost_min(T, y, eta));
    }
    if (best_max > g0 + term_tol || g0 > best_min + term_tol) {
      if (report.terminal_no_impulse_ok)
        report.violations.push_back({"H_G", witness(T, y)});
      report.terminal_no_impulse_ok = false;
    }
  }

  // Sampled Lipschitz constants in y by pairwise finite differences. All node
  // pairs on small grids, consecutive pairs otherwise.
  const bool all_pairs = J <= 64;
  auto lip = [&](auto&& eval) {
    double worst = 0.0;
    for (std::size_t j1 = 0; j1 < J; ++j1) {
      const std::size_t j2_end = all_pairs ? J : std::min(J, j1 + 2);
      for (std::size_t j2 = j1 + 1; j2 < j2_end; ++j2) {
        const double dist = eucl_norm_diff(nodes[j1], nodes[j2]);
        if (dist <= 0.0) continue;
        worst = std::max(worst, eval(nodes[j1], nodes[j2]) / dist);
      }
    }
    return worst;
  };
  auto lip_vector = [&](const VectorFn& fn, const std::vector<Vec>& controls) {
    return lip([&](const Vec& y1, const Vec& y2) {
      double worst = 0.0;
      for (int i = 0; i < I; ++i) {
        const double s = sample_grid.time_node(i);
        for (const auto& u : controls) {
          const Vec a = fn(s, y1, u);
          const Vec b = fn(s, y2, u);
          double diff = 0.0;
          for (std::size_t d = 0; d < a.size(); ++d) diff = std::max(diff, std::abs(a[d] - b[d]));
          worst = std::max(worst, diff);
        }
      }
      return worst;
    });
  };
  auto lip_scalar = [&](const ScalarFn& fn, const std::vector<Vec>& controls) {
    return lip([&](const Vec& y1, const Vec& y2) {
      double worst = 0.0;
      for (int i = 0; i < I; ++i) {
        const double s = sample_grid.time_node(i);
        for (const auto& u : controls)
          worst = std::max(worst, std::abs(fn(s, y1, u) - fn(s, y2, u)));
      }
      return worst;
    });
  };
  report.lipschitz_estimates["dynamics"] = lip_vector(problem.dynamics, problem.continuous_controls);
  report.lipschitz_estimates["jump_max"] = lip_vector(problem.jump_max, problem.max_impulses);
  report.lipschitz_estimates["jump_min"] = lip_vector(problem.jump_min, problem.min_impulses);
  report.lipschitz_estimates["running_gain"] =
      lip_scalar(problem.running_gain, problem.continuous_controls);
  report.lipschitz_estimates["cost_max"] = lip_scalar(problem.cost_max, problem.max_impulses);
  report.lipschitz_estimates["cost_min"] = lip_scalar(problem.cost_min, problem.min_impulses);
  report.lipschitz_estimates["terminal_gain"] = lip([&](const Vec& y1, const Vec& y2) {
    return std::abs(problem.terminal_gain(y1) - problem.terminal_gain(y2));
  });

  if (!std::isfinite(report.cost_infimum)) report.cost_infimum = 0.0;
  return report;
}

TrajectoryRecord simulate_trajectory(const GameProblem& problem, double t0, const Vec& start,
                                     const ControlInputs& controls, double h,
                                     const TimeSpaceGrid* domain) {
  if (!(h > 0.0)) throw ConfigError("simulation step h must be positive");
  const double lh = problem.discount * h;
  if (!(lh < 1.0)) throw ConfigError("simulation requires lambda*h < 1");
  const double span = problem.t_end - t0;
  const double ratio = span / h;
  const long steps = std::lround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("step h must divide the remaining horizon T - t0");

  TrajectoryRecord record;
  record.states.reserve(steps + 1);
  record.states.push_back(start);
  record.regimes.assign(steps + 1, Regime::continuous);
  record.regimes.back() = Regime::terminal;
  record.realized_values.assign(steps + 1, std::numeric_limits<double>::quiet_NaN());

  // A maximizer impulse is suppressed whenever its time coincides exactly
  // with a minimizer impulse time.
  auto collides = [&](double time) {
    for (const auto& imp : controls.min_impulses)
      if (!imp.placeholder && imp.time == time) return true;
    return false;
  };

  double discount_pow = 1.0;  // (1 - lambda*h)^d
  double payoff = 0.0;
  Vec y = start;

  for (long d = 0; d < steps; ++d) {
    const double s_lo = t0 + d * h;
    const double s_hi = (d == steps - 1) ? problem.t_end : t0 + (d + 1) * h;
    auto in_window = [&](double time) { return time >= s_lo && time < s_hi; };

    int theta_idx = 0;
    if (static_cast<std::size_t>(d) < controls.theta_timeline.size() &&
        controls.theta_timeline[d].has_value())
      theta_idx = *controls.theta_timeline[d];
    if (theta_idx < 0 || theta_idx >= static_cast<int>(problem.continuous_controls.size()))
      throw ConfigError("theta timeline index out of range at step " + std::to_string(d));
    const Vec& theta = problem.continuous_controls[theta_idx];

    payoff += h * problem.running_gain(s_lo, y, theta) * discount_pow;

    Vec jump(problem.state_dim, 0.0);
    bool any_impulse_time = false, min_applied = false, max_applied = false;
    for (const auto& imp : controls.min_impulses) {
      if (imp.placeholder || !in_window(imp.time)) continue;
      any_impulse_time = true;
      min_applied = true;
      const Vec g = problem.jump_min(imp.time, y, imp.value);
      for (int k = 0; k < problem.state_dim; ++k) jump[k] += g[k];
      payoff += problem.cost_min(imp.time, y, imp.value) * discount_pow;
    }
    for (const auto& imp : controls.max_impulses) {
      if (imp.placeholder || !in_window(imp.time)) continue;
      any_impulse_time = true;  // suppresses drift even when the jump collides away
      if (collides(imp.time)) continue;
      max_applied = true;
      const Vec g = problem.jump_max(imp.time, y, imp.value);
      for (int k = 0; k < problem.state_dim; ++k) jump[k] += g[k];
      payoff -= problem.cost_max(imp.time, y, imp.value) * discount_pow;
    }

    Vec next = y;
    if (any_impulse_time) {
      for (int k = 0; k < problem.state_dim; ++k) next[k] += jump[k];
      record.regimes[d] = min_applied ? Regime::min_impulse : Regime::max_impulse;
    } else {
      const Vec b = problem.dynamics(s_lo, y, theta);
      for (int k = 0; k < problem.state_dim; ++k) next[k] += h * b[k];
    }

    if (domain && domain->boundary == BoundaryPolicy::error && !domain->contains(next)) {
      std::ostringstream msg;
      msg << "state left the space domain at step " << (d + 1) << " (s=" << s_hi
          << ", y=" << fmt_vec(next) << ")";
      throw DomainError(msg.str(), -1, 0.0);
    }

    y = std::move(next);
    record.states.push_back(y);
    discount_pow *= (1.0 - lh);
  }

  payoff += problem.terminal_gain(y) * discount_pow;
  record.payoff = payoff;
  return record;
}

}  // namespace hjbi
