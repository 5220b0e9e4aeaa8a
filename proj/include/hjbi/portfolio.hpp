#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "hjbi/game_model.hpp"
#include "hjbi/nash.hpp"
#include "hjbi/solver.hpp"

namespace hjbi {

struct MarketModel {
  int num_stocks = 1;
  std::vector<std::function<double(double)>> returns;  // instantaneous return r_i(s)
  Vec price_normalization;                             // P_i(t) > 0, reporting only
};

// Worst-case portfolio game data: wealth dynamics driven by weighted
// instantaneous returns, simplex weight grids for the continuous composition
// and both players' rebalancing impulses, fixed-plus-proportional
// transaction costs and a running holding-cost-minus-utility gain.
struct PortfolioProblem {
  MarketModel market;
  std::vector<Vec> weight_grid;  // shared simplex candidates
  std::optional<std::vector<Vec>> continuous_weights;  // per-role overrides
  std::optional<std::vector<Vec>> market_weights;
  std::optional<std::vector<Vec>> investor_weights;

  double holding_quad = 0.0;  // l = holding_quad * w^2 + holding_lin * w
  double holding_lin = 0.0;
  double utility_log = 0.0;  // u = utility_log * log(w clipped to the box) + utility_lin * w
  double utility_lin = 0.0;

  double cost_fixed = 0.0;  // kappa0 > 0
  double cost_prop = 0.0;   // kappa1 >= 0; cost = kappa0 + kappa1 * w

  double terminal_lin = 0.0;  // G = terminal_lin * w + terminal_const
  double terminal_const = 0.0;

  double discount = 1.0;
  double t_start = 0.0;
  double t_end = 1.0;
  std::optional<DampingFn> damping;       // default exp(-lambda h)
  std::optional<double> jump_scale;       // Delta in the impulse return increment; default h
  double initial_wealth = 1.0;
};

void check_portfolio(const PortfolioProblem& pp);

// Generates every composition with denominator `resolution` on the
// num_stocks-simplex, in lexicographic order.
std::vector<Vec> simplex_weight_grid(int num_stocks, int resolution);

// Instantiates the 1-dimensional wealth game. The impulse jump realizes the
// return differential at the impulse instant as r_i(tau) * Delta with
// Delta = h by convention; wealth_box bounds the log-utility clipping.
GameProblem build_portfolio_game(const PortfolioProblem& pp, double h,
                                 std::pair<double, double> wealth_box);

struct PortfolioOutcome {
  Vec price_normalization;  // reporting only
  double initial_wealth = 0.0;
  double worst_case_value = 0.0;  // investor's maximal lost v(t, w)
  NashStrategy strategy;          // weight vectors via the grids below
  std::vector<Vec> continuous_grid;
  std::vector<Vec> market_grid;
  std::vector<Vec> investor_grid;
  TrajectoryRecord path;
};

std::pair<SolveReport, PortfolioOutcome> solve_portfolio(const PortfolioProblem& pp,
                                                         const std::vector<AxisSpec>& wealth_box,
                                                         BoundaryPolicy boundary, double h,
                                                         const SolverConfig& config);

}  // namespace hjbi
