#include "hjbi/config.hpp"

#include <fstream>

#include "hjbi/catalog.hpp"

namespace hjbi {

namespace {

using nlohmann::json;

Vec as_vec(const json& v, const std::string& context) {
  if (v.is_number()) return Vec{v.get<double>()};
  if (!v.is_array()) throw ConfigError(context + " must be a number or array");
  Vec out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x.get<double>());
  return out;
}

std::vector<Vec> as_grid(const json& v, const std::string& context) {
  if (!v.is_array() || v.empty()) throw ConfigError(context + " must be a non-empty array");
  std::vector<Vec> out;
  out.reserve(v.size());
  for (const auto& entry : v) out.push_back(as_vec(entry, context + " entry"));
  const std::size_t dim = out.front().size();
  for (const auto& e : out)
    if (e.size() != dim) throw ConfigError(context + " entries must share one dimension");
  return out;
}

std::pair<double, double> parse_horizon(const json& obj, const std::string& context) {
  if (!obj.contains("horizon")) throw ConfigError(context + " needs a horizon {t, T}");
  const json& hz = obj["horizon"];
  ensure_keys(hz, {"t", "T"}, context + ".horizon");
  if (!hz.contains("t") || !hz.contains("T"))
    throw ConfigError(context + ".horizon needs both t and T");
  return {hz["t"].get<double>(), hz["T"].get<double>()};
}

GameProblem parse_problem(const json& p, Vec& initial_state,
                          std::optional<Vec>& min_placeholder) {
  ensure_keys(p,
              {"state_dim", "horizon", "discount", "damping", "dynamics", "jump_max", "jump_min",
               "running_gain", "cost_max", "cost_min", "terminal_gain", "continuous_controls",
               "max_impulses", "min_impulses", "initial_state", "min_placeholder"},
              "problem");

  GameProblem game;
  game.state_dim = p.value("state_dim", 1);
  std::tie(game.t_start, game.t_end) = parse_horizon(p, "problem");
  if (!p.contains("discount")) throw ConfigError("problem.discount is required");
  game.discount = p["discount"].get<double>();

  for (const char* key : {"continuous_controls", "max_impulses", "min_impulses"})
    if (!p.contains(key)) throw ConfigError(std::string("problem.") + key + " is required");
  game.continuous_controls = as_grid(p["continuous_controls"], "problem.continuous_controls");
  game.max_impulses = as_grid(p["max_impulses"], "problem.max_impulses");
  game.min_impulses = as_grid(p["min_impulses"], "problem.min_impulses");

  const int n = game.state_dim;
  const int l = static_cast<int>(game.continuous_controls.front().size());
  const int pu = static_cast<int>(game.max_impulses.front().size());
  const int qv = static_cast<int>(game.min_impulses.front().size());

  auto fn_spec = [&](const char* key) -> const json& {
    if (!p.contains(key)) throw ConfigError(std::string("problem.") + key + " is required");
    return p[key];
  };
  game.dynamics = make_vector_function(fn_spec("dynamics"), n, l, "problem.dynamics");
  game.jump_max = make_vector_function(fn_spec("jump_max"), n, pu, "problem.jump_max");
  game.jump_min = make_vector_function(fn_spec("jump_min"), n, qv, "problem.jump_min");
  game.running_gain = make_scalar_function(fn_spec("running_gain"), n, l, "problem.running_gain");
  game.cost_max = make_scalar_function(fn_spec("cost_max"), n, pu, "problem.cost_max");
  game.cost_min = make_scalar_function(fn_spec("cost_min"), n, qv, "problem.cost_min");
  game.terminal_gain = make_terminal_function(fn_spec("terminal_gain"), n, "problem.terminal_gain");
  game.damping = make_damping_function(p.contains("damping") ? p["damping"] : json(),
                                       game.discount, "problem.damping");

  if (p.contains("initial_state")) {
    initial_state = as_vec(p["initial_state"], "problem.initial_state");
    if (static_cast<int>(initial_state.size()) != n)
      throw ConfigError("problem.initial_state dimension does not match state_dim");
  }
  if (p.contains("min_placeholder"))
    min_placeholder = as_vec(p["min_placeholder"], "problem.min_placeholder");

  check_structure(game);
  return game;
}

PortfolioProblem parse_portfolio(const json& p) {
  ensure_keys(p,
              {"num_stocks", "returns", "price_normalization", "weight_resolution", "weights",
               "continuous_weights", "market_weights", "investor_weights", "holding_quad",
               "holding_lin", "utility_log", "utility_lin", "cost_fixed", "cost_prop",
               "terminal_lin", "terminal_const", "discount", "horizon", "damping", "jump_scale",
               "initial_wealth"},
              "portfolio");

  PortfolioProblem pp;
  pp.market.num_stocks = p.value("num_stocks", 1);
  if (!p.contains("returns")) throw ConfigError("portfolio.returns is required");
  const json& curves = p["returns"];
  if (!curves.is_array() || static_cast<int>(curves.size()) != pp.market.num_stocks)
    throw ConfigError("portfolio.returns must list one curve per stock");
  for (std::size_t i = 0; i < curves.size(); ++i)
    pp.market.returns.push_back(
        make_time_function(curves[i], "portfolio.returns[" + std::to_string(i) + "]"));
  if (p.contains("price_normalization"))
    pp.market.price_normalization = as_vec(p["price_normalization"], "portfolio.price_normalization");
  else
    pp.market.price_normalization = Vec(pp.market.num_stocks, 1.0);

  if (p.contains("weights"))
    pp.weight_grid = as_grid(p["weights"], "portfolio.weights");
  else
    pp.weight_grid = simplex_weight_grid(pp.market.num_stocks, p.value("weight_resolution", 1));
  if (p.contains("continuous_weights"))
    pp.continuous_weights = as_grid(p["continuous_weights"], "portfolio.continuous_weights");
  if (p.contains("market_weights"))
    pp.market_weights = as_grid(p["market_weights"], "portfolio.market_weights");
  if (p.contains("investor_weights"))
    pp.investor_weights = as_grid(p["investor_weights"], "portfolio.investor_weights");

  pp.holding_quad = p.value("holding_quad", 0.0);
  pp.holding_lin = p.value("holding_lin", 0.0);
  pp.utility_log = p.value("utility_log", 0.0);
  pp.utility_lin = p.value("utility_lin", 0.0);
  if (!p.contains("cost_fixed")) throw ConfigError("portfolio.cost_fixed is required");
  pp.cost_fixed = p["cost_fixed"].get<double>();
  pp.cost_prop = p.value("cost_prop", 0.0);
  pp.terminal_lin = p.value("terminal_lin", 0.0);
  pp.terminal_const = p.value("terminal_const", 0.0);
  if (!p.contains("discount")) throw ConfigError("portfolio.discount is required");
  pp.discount = p["discount"].get<double>();
  std::tie(pp.t_start, pp.t_end) = parse_horizon(p, "portfolio");
  if (p.contains("damping"))
    pp.damping = make_damping_function(p["damping"], pp.discount, "portfolio.damping");
  if (p.contains("jump_scale")) pp.jump_scale = p["jump_scale"].get<double>();
  pp.initial_wealth = p.value("initial_wealth", 1.0);

  check_portfolio(pp);
  return pp;
}

}  // namespace

Config parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  ensure_keys(doc, {"problem", "grid", "solver", "portfolio", "output"}, "config");

  Config config;
  config.raw = doc;

  if (!doc.contains("grid")) throw ConfigError("config needs a [grid] section");
  const json& g = doc["grid"];
  ensure_keys(g, {"h", "space", "boundary"}, "grid");
  if (!g.contains("h") || !g.contains("space"))
    throw ConfigError("grid needs h and space");
  config.grid.h = g["h"].get<double>();
  for (const auto& axis : g["space"]) {
    ensure_keys(axis, {"lo", "hi", "count"}, "grid.space axis");
    if (!axis.contains("lo") || !axis.contains("hi") || !axis.contains("count"))
      throw ConfigError("grid.space axes need lo, hi and count");
    config.grid.axes.push_back(
        {axis["lo"].get<double>(), axis["hi"].get<double>(), axis["count"].get<int>()});
  }
  if (g.contains("boundary"))
    config.grid.boundary = boundary_from_name(g["boundary"].get<std::string>());

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    ensure_keys(s,
                {"tolerance", "max_iterations", "switch_tolerance", "record_convergence",
                 "allow_large_lambda_h", "h_list"},
                "solver");
    config.solver.tolerance = s.value("tolerance", config.solver.tolerance);
    config.solver.max_iterations = s.value("max_iterations", config.solver.max_iterations);
    config.solver.switch_tolerance = s.value("switch_tolerance", config.solver.switch_tolerance);
    config.solver.record_convergence =
        s.value("record_convergence", config.solver.record_convergence);
    config.solver.allow_large_lambda_h =
        s.value("allow_large_lambda_h", config.solver.allow_large_lambda_h);
    if (s.contains("h_list")) config.h_list = s["h_list"].get<std::vector<double>>();
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    ensure_keys(o, {"directory", "emit_plots", "seed", "deviations", "ne_tolerance"}, "output");
    config.output.directory = o.value("directory", config.output.directory);
    config.output.emit_plots = o.value("emit_plots", config.output.emit_plots);
    config.output.seed = o.value("seed", config.output.seed);
    config.output.deviations = o.value("deviations", config.output.deviations);
    config.output.ne_tolerance = o.value("ne_tolerance", config.output.ne_tolerance);
  }

  if (doc.contains("problem")) {
    std::optional<Vec> placeholder;
    config.problem = parse_problem(doc["problem"], config.initial_state, placeholder);
    config.solver.min_placeholder = placeholder;
    if (config.initial_state.empty()) {
      // Default probe point: the centre of the space box.
      for (const auto& axis : config.grid.axes)
        config.initial_state.push_back(0.5 * (axis.lo + axis.hi));
    }
  }

  if (doc.contains("portfolio")) config.portfolio = parse_portfolio(doc["portfolio"]);

  if (!config.problem && !config.portfolio)
    throw ConfigError("config needs a [problem] or a [portfolio] section");
  return config;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return parse_config(doc);
}

void apply_overrides(Config& config, const Overrides& overrides) {
  if (overrides.h) config.grid.h = *overrides.h;
  if (overrides.tolerance) config.solver.tolerance = *overrides.tolerance;
  if (overrides.max_iterations) config.solver.max_iterations = *overrides.max_iterations;
  if (overrides.output_directory) config.output.directory = *overrides.output_directory;
  if (overrides.emit_plots) config.output.emit_plots = *overrides.emit_plots;
  if (overrides.boundary) config.grid.boundary = boundary_from_name(*overrides.boundary);
  if (overrides.seed) config.output.seed = *overrides.seed;
}

}  // namespace hjbi
