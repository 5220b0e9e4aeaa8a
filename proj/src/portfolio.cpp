#include "hjbi/portfolio.hpp"

#include <algorithm>
#include <cmath>

namespace hjbi {

namespace {

bool sums_to_one(const Vec& w) {
  double s = 0.0;
  for (double x : w) s += x;
  return std::abs(s - 1.0) <= 1e-12;
}

}  // namespace

void check_portfolio(const PortfolioProblem& pp) {
  if (pp.market.num_stocks < 1) throw ConfigError("portfolio needs at least one stock");
  if (static_cast<int>(pp.market.returns.size()) != pp.market.num_stocks)
    throw ConfigError("one return curve per stock is required");
  // Sampled boundedness check of the return curves on [t, T].
  for (int i = 0; i < pp.market.num_stocks; ++i)
    for (int k = 0; k <= 64; ++k) {
      const double s = pp.t_start + k * (pp.t_end - pp.t_start) / 64.0;
      if (!std::isfinite(pp.market.returns[i](s)))
        throw ConfigError("return curve " + std::to_string(i) + " is unbounded at s=" +
                          std::to_string(s));
    }
  for (double price : pp.market.price_normalization)
    if (!(price > 0.0)) throw ConfigError("price normalization entries must be positive");
  if (pp.weight_grid.empty()) throw ConfigError("portfolio weight grid is empty");
  auto check_grid = [&](const std::vector<Vec>& grid, const char* name) {
    for (const auto& w : grid) {
      if (static_cast<int>(w.size()) != pp.market.num_stocks)
        throw ConfigError(std::string(name) + " weight vector has wrong dimension");
      if (!sums_to_one(w))
        throw ConfigError(std::string(name) + " weight vector does not sum to 1 within 1e-12");
    }
  };
  check_grid(pp.weight_grid, "shared");
  if (pp.continuous_weights) check_grid(*pp.continuous_weights, "continuous");
  if (pp.market_weights) check_grid(*pp.market_weights, "market");
  if (pp.investor_weights) check_grid(*pp.investor_weights, "investor");
  if (!(pp.cost_fixed > 0.0))
    throw ConfigError("fixed transaction cost kappa0 must be strictly positive");
  if (pp.cost_prop < 0.0) throw ConfigError("proportional transaction cost must be >= 0");
  if (!(pp.discount > 0.0)) throw ConfigError("portfolio discount must be positive");
  if (!(pp.t_end > pp.t_start)) throw ConfigError("portfolio horizon must satisfy T > t");
  if (!(pp.initial_wealth > 0.0)) throw ConfigError("initial wealth must be positive");
}

std::vector<Vec> simplex_weight_grid(int num_stocks, int resolution) {
  if (num_stocks < 1 || resolution < 1)
    throw ConfigError("simplex grid needs num_stocks >= 1 and resolution >= 1");
  std::vector<Vec> out;
  Vec current(num_stocks, 0.0);
  // Lexicographic enumeration of compositions k_1 + ... + k_N = resolution.
  std::function<void(int, int)> rec = [&](int stock, int remaining) {
    if (stock == num_stocks - 1) {
      current[stock] = static_cast<double>(remaining) / resolution;
      out.push_back(current);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      current[stock] = static_cast<double>(k) / resolution;
      rec(stock + 1, remaining - k);
    }
  };
  rec(0, resolution);
  return out;
}

GameProblem build_portfolio_game(const PortfolioProblem& pp, double h,
                                 std::pair<double, double> wealth_box) {
  check_portfolio(pp);
  if (!(wealth_box.first > 0.0)) throw ConfigError("wealth grid must be strictly positive");

  const double delta = pp.jump_scale.value_or(h);
  const auto returns = pp.market.returns;
  const int N = pp.market.num_stocks;

  auto weighted_return = [returns, N](double s, const Vec& weights) {
    double r = 0.0;
    for (int i = 0; i < N; ++i) r += weights[i] * returns[i](s);
    return r;
  };

  GameProblem game;
  game.state_dim = 1;
  game.continuous_controls = pp.continuous_weights.value_or(pp.weight_grid);
  game.max_impulses = pp.market_weights.value_or(pp.weight_grid);
  game.min_impulses = pp.investor_weights.value_or(pp.weight_grid);
  game.discount = pp.discount;
  game.t_start = pp.t_start;
  game.t_end = pp.t_end;
  game.damping = pp.damping.value_or(
      [lambda = pp.discount](double step) { return std::exp(-lambda * step); });

  game.dynamics = [weighted_return](double s, const Vec& y, const Vec& w) {
    return Vec{y[0] * weighted_return(s, w)};
  };
  game.jump_max = [weighted_return, delta](double s, const Vec& y, const Vec& w) {
    return Vec{y[0] * weighted_return(s, w) * delta};
  };
  game.jump_min = game.jump_max;

  const double hq = pp.holding_quad, hl = pp.holding_lin;
  const double ul = pp.utility_log, ulin = pp.utility_lin;
  const double clip_lo = wealth_box.first, clip_hi = wealth_box.second;
  game.running_gain = [hq, hl, ul, ulin, clip_lo, clip_hi](double, const Vec& y, const Vec&) {
    const double w = y[0];
    const double holding = hq * w * w + hl * w;
    const double utility = ul * std::log(std::clamp(w, clip_lo, clip_hi)) + ulin * w;
    return holding - utility;
  };

  const double k0 = pp.cost_fixed, k1 = pp.cost_prop;
  game.cost_max = [k0, k1](double, const Vec& y, const Vec&) { return k0 + k1 * y[0]; };
  game.cost_min = game.cost_max;

  const double gl = pp.terminal_lin, gc = pp.terminal_const;
  game.terminal_gain = [gl, gc](const Vec& y) { return gl * y[0] + gc; };
  return game;
}

std::pair<SolveReport, PortfolioOutcome> solve_portfolio(const PortfolioProblem& pp,
                                                         const std::vector<AxisSpec>& wealth_box,
                                                         BoundaryPolicy boundary, double h,
                                                         const SolverConfig& config) {
  if (wealth_box.size() != 1) throw ConfigError("portfolio wealth grid is one-dimensional");
  const GameProblem game =
      build_portfolio_game(pp, h, {wealth_box.front().lo, wealth_box.front().hi});
  const TimeSpaceGrid grid = build_grid(pp.t_start, pp.t_end, h, wealth_box, boundary);

  SolveReport report = backward_sweep(game, grid, config);
  ExtractionResult eq = extract_equilibrium(game, grid, report, Vec{pp.initial_wealth}, config);

  PortfolioOutcome outcome;
  outcome.price_normalization = pp.market.price_normalization;
  outcome.initial_wealth = pp.initial_wealth;
  outcome.worst_case_value = interpolate(report.field.slice(0), grid, Vec{pp.initial_wealth});
  outcome.strategy = std::move(eq.strategy);
  outcome.continuous_grid = game.continuous_controls;
  outcome.market_grid = game.max_impulses;
  outcome.investor_grid = game.min_impulses;
  outcome.path = std::move(eq.path);
  return {std::move(report), std::move(outcome)};
}

}  // namespace hjbi
