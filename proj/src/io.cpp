#include "hjbi/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace hjbi {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

void dump_json(const std::string& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

json impulse_to_json(const Impulse& imp) {
  return json{{"time", imp.time},
              {"value", imp.value},
              {"grid_index", imp.grid_index},
              {"placeholder", imp.placeholder}};
}

json grid_to_json(const TimeSpaceGrid& grid) {
  json axes = json::array();
  for (const auto& axis : grid.space_axes)
    axes.push_back({{"lo", axis.front()}, {"hi", axis.back()}, {"count", axis.size()}});
  return json{{"t", grid.t_start},
              {"T", grid.t_end},
              {"h", grid.h},
              {"time_nodes", grid.num_time_nodes},
              {"boundary", boundary_name(grid.boundary)},
              {"space", axes}};
}

}  // namespace

std::string format_double(double x) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string checksum_hex(const std::string& data) {
  char buffer[24];
  std::snprintf(buffer, sizeof buffer, "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buffer;
}

void write_value_field_csv(const std::string& path, const TimeSpaceGrid& grid,
                           const ValueField& field) {
  auto out = open_out(path);
  out << "s";
  for (int d = 0; d < grid.dim(); ++d) out << ",y" << (d + 1);
  out << ",V,regime,theta_index,xi_index,eta_index\n";
  for (int i = 0; i < field.num_time_nodes; ++i) {
    const std::string s = format_double(grid.time_node(i));
    for (std::size_t j = 0; j < field.num_space_nodes; ++j) {
      const Vec y = grid.space_node(j);
      const std::size_t flat = field.flat(i, j);
      out << s;
      for (double c : y) out << "," << format_double(c);
      out << "," << format_double(field.values[flat]) << "," << regime_name(field.regime[flat])
          << "," << field.theta_index[flat] << "," << field.xi_index[flat] << ","
          << field.eta_index[flat] << "\n";
    }
  }
}

void write_value_field_meta(const std::string& path, const TimeSpaceGrid& grid,
                            const GameProblem& problem, const SolverConfig& config) {
  json doc{{"grid", grid_to_json(grid)},
           {"lambda", problem.discount},
           {"phi_at_h", problem.damping(grid.h)},
           {"tolerance", config.tolerance},
           {"switch_tolerance", config.effective_switch_tolerance()},
           {"tool_version", kToolVersion}};
  dump_json(path, doc);
}

std::pair<TimeSpaceGrid, ValueField> read_value_field(const std::string& csv_path,
                                                      const std::string& meta_path) {
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw ConfigError("cannot open metadata file: " + meta_path);
  json meta;
  meta_in >> meta;
  const json& g = meta.at("grid");
  std::vector<AxisSpec> axes;
  for (const auto& axis : g.at("space"))
    axes.push_back({axis.at("lo").get<double>(), axis.at("hi").get<double>(),
                    axis.at("count").get<int>()});
  TimeSpaceGrid grid = build_grid(g.at("t").get<double>(), g.at("T").get<double>(),
                                  g.at("h").get<double>(), axes,
                                  boundary_from_name(g.at("boundary").get<std::string>()));

  ValueField field(grid.num_time_nodes, grid.num_space_nodes());
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open value CSV: " + csv_path);
  std::string line;
  std::getline(in, line);  // header
  const int n = grid.dim();
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    for (int skip = 0; skip < 1 + n; ++skip) std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    field.values[row] = std::strtod(cell.c_str(), nullptr);
    std::getline(ss, cell, ',');
    field.regime[row] = regime_from_name(cell);
    std::getline(ss, cell, ',');
    field.theta_index[row] = std::stoi(cell);
    std::getline(ss, cell, ',');
    field.xi_index[row] = std::stoi(cell);
    std::getline(ss, cell, ',');
    field.eta_index[row] = std::stoi(cell);
    ++row;
  }
  if (row != field.values.size())
    throw ConfigError("value CSV row count does not match the grid in " + csv_path);
  return {std::move(grid), std::move(field)};
}

void write_solve_report_json(const std::string& path, const SolveReport& report) {
  json slices = json::array();
  for (const auto& st : report.slices)
    slices.push_back({{"slice", st.slice},
                      {"policy_outer_min", st.policy_outer_min},
                      {"policy_outer_max", st.policy_outer_max},
                      {"value_iterations_min", st.value_iterations_min},
                      {"value_iterations_max", st.value_iterations_max},
                      {"reconcile_iterations", st.reconcile_iterations},
                      {"residual", st.residual}});
  json doc{{"converged", report.converged},
           {"max_residual", report.max_residual},
           {"slices", slices},
           {"warnings", report.warnings}};
  if (!report.convergence_history.empty()) doc["convergence_history"] = report.convergence_history;
  dump_json(path, doc);
}

void write_convergence_csv(const std::string& path, const SolveReport& report) {
  auto out = open_out(path);
  out << "slice,iteration,delta\n";
  // History entries were recorded backward in time, matching the sweep.
  int slice = report.field.num_time_nodes - 2;
  for (const auto& deltas : report.convergence_history) {
    for (std::size_t k = 0; k < deltas.size(); ++k)
      out << slice << "," << (k + 1) << "," << format_double(deltas[k]) << "\n";
    --slice;
  }
}

void write_assumptions_json(const std::string& path, const AssumptionReport& report) {
  json violations = json::array();
  for (const auto& v : report.violations)
    violations.push_back({{"assumption", v.assumption}, {"witness", v.witness}});
  dump_json(path, json{{"bound_m_estimate", report.bound_m_estimate},
                       {"sup_dynamics", report.sup_dynamics},
                       {"sup_running_gain", report.sup_running_gain},
                       {"lipschitz_estimates", report.lipschitz_estimates},
                       {"cost_infimum", report.cost_infimum},
                       {"terminal_no_impulse_ok", report.terminal_no_impulse_ok},
                       {"violations", violations}});
}

void write_strategy_json(const std::string& path, const NashStrategy& strategy,
                         const TrajectoryRecord& record) {
  json timeline = json::array();
  for (const auto& idx : strategy.theta_timeline)
    timeline.push_back(idx ? json(*idx) : json(nullptr));
  json maxi = json::array(), mini = json::array();
  for (const auto& imp : strategy.max_impulses) maxi.push_back(impulse_to_json(imp));
  for (const auto& imp : strategy.min_impulses) mini.push_back(impulse_to_json(imp));
  json doc{{"theta_timeline", timeline},
           {"max_impulses", maxi},
           {"min_impulses", mini},
           {"payoff", record.payoff},
           {"truncated", record.truncated}};
  if (record.truncated) doc["diagnostic"] = record.diagnostic;
  dump_json(path, doc);
}

void write_strategy_csv(const std::string& path, const TimeSpaceGrid& grid,
                        const NashStrategy& strategy, const TrajectoryRecord& record) {
  auto out = open_out(path);
  out << "s,regime,theta_index,xi_index,eta_index";
  for (int d = 0; d < grid.dim(); ++d) out << ",y" << (d + 1);
  out << ",V\n";

  auto impulse_at = [](const std::vector<Impulse>& list, double s) {
    for (const auto& imp : list)
      if (!imp.placeholder && imp.time == s) return imp.grid_index;
    return -1;
  };
  for (std::size_t i = 0; i < record.states.size(); ++i) {
    const double s = grid.time_node(static_cast<int>(i));
    const int theta = (i < strategy.theta_timeline.size() && strategy.theta_timeline[i])
                          ? *strategy.theta_timeline[i]
                          : -1;
    out << format_double(s) << "," << regime_name(record.regimes[i]) << "," << theta << ","
        << impulse_at(strategy.max_impulses, s) << "," << impulse_at(strategy.min_impulses, s);
    for (double c : record.states[i]) out << "," << format_double(c);
    out << "," << format_double(record.realized_values[i]) << "\n";
  }
}

void write_trajectory_csv(const std::string& path, const TimeSpaceGrid& grid,
                          const TrajectoryRecord& record) {
  auto out = open_out(path);
  out << "s";
  for (int d = 0; d < grid.dim(); ++d) out << ",y" << (d + 1);
  out << ",V,regime\n";
  for (std::size_t i = 0; i < record.states.size(); ++i) {
    out << format_double(grid.time_node(static_cast<int>(i)));
    for (double c : record.states[i]) out << "," << format_double(c);
    out << "," << format_double(record.realized_values[i]) << ","
        << regime_name(record.regimes[i]) << "\n";
  }
}

void write_ne_report_json(const std::string& path, const NEReport& report) {
  auto dev = [](const DeviationRecord& d) {
    return json{{"kind", d.kind}, {"payoff", d.payoff}, {"improvement", d.improvement}};
  };
  dump_json(path, json{{"value_at_start", report.value_at_start},
                       {"equilibrium_payoff", report.equilibrium_payoff},
                       {"value_match_error", report.value_match_error},
                       {"value_match_ok", report.value_match_ok},
                       {"deviations_per_side", report.deviations_per_side},
                       {"worst_max_improvement", report.worst_max_improvement},
                       {"worst_min_improvement", report.worst_min_improvement},
                       {"worst_max_deviation", dev(report.worst_max_deviation)},
                       {"worst_min_deviation", dev(report.worst_min_deviation)},
                       {"tolerance", report.tolerance},
                       {"pass", report.pass}});
}

void write_refinement_csv(const std::string& path, const RefinementStudy& study) {
  auto out = open_out(path);
  out << "h,sup_diff_to_finest,iterations,value_at_probe\n";
  for (const auto& row : study.rows)
    out << format_double(row.h) << "," << format_double(row.sup_diff) << "," << row.iterations
        << "," << format_double(row.value_at_probe) << "\n";
}

void write_refinement_json(const std::string& path, const RefinementStudy& study) {
  json rows = json::array();
  for (const auto& row : study.rows)
    rows.push_back({{"h", row.h},
                    {"sup_diff_to_finest", row.sup_diff},
                    {"iterations", row.iterations},
                    {"value_at_probe", row.value_at_probe}});
  dump_json(path, json{{"rows", rows},
                       {"monotone_trend", study.monotone_trend},
                       {"warnings", study.warnings}});
}

void write_residual_csv(const std::string& path, const GameProblem& problem,
                        const TimeSpaceGrid& grid, const ValueField& field) {
  auto out = open_out(path);
  out << "s";
  for (int d = 0; d < grid.dim(); ++d) out << ",y" << (d + 1);
  out << ",hjb_residual,lower_gap,upper_gap,composite\n";
  for (int i = 0; i + 1 < field.num_time_nodes; ++i) {
    const std::string s = format_double(grid.time_node(i));
    for (std::size_t j = 0; j < field.num_space_nodes; ++j) {
      const auto r = obstacle_residuals(problem, grid, field, i, j);
      out << s;
      for (double c : grid.space_node(j)) out << "," << format_double(c);
      out << "," << format_double(r.hjb) << "," << format_double(r.lower_gap) << ","
          << format_double(r.upper_gap) << "," << format_double(r.composite()) << "\n";
    }
  }
}

void write_portfolio_json(const std::string& path, const PortfolioOutcome& outcome) {
  auto impulses = [](const std::vector<Impulse>& list, const std::vector<Vec>& grid) {
    json arr = json::array();
    for (const auto& imp : list) {
      json e = impulse_to_json(imp);
      if (imp.grid_index >= 0) e["weights"] = grid[imp.grid_index];
      arr.push_back(e);
    }
    return arr;
  };
  json timeline = json::array();
  for (std::size_t i = 0; i < outcome.strategy.theta_timeline.size(); ++i) {
    const auto& idx = outcome.strategy.theta_timeline[i];
    if (idx)
      timeline.push_back({{"step", i}, {"weights", outcome.continuous_grid[*idx]}});
  }
  dump_json(path, json{{"initial_wealth", outcome.initial_wealth},
                       {"price_normalization", outcome.price_normalization},
                       {"worst_case_value", outcome.worst_case_value},
                       {"instantaneous_compositions", timeline},
                       {"market_impulses", impulses(outcome.strategy.max_impulses,
                                                    outcome.market_grid)},
                       {"investor_impulses", impulses(outcome.strategy.min_impulses,
                                                      outcome.investor_grid)},
                       {"payoff", outcome.path.payoff}});
}

void write_portfolio_csv(const std::string& path, const TimeSpaceGrid& grid,
                         const PortfolioOutcome& outcome) {
  auto out = open_out(path);
  const std::size_t N = outcome.continuous_grid.front().size();
  out << "s,w,regime";
  for (std::size_t i = 0; i < N; ++i) out << ",omega" << (i + 1);
  out << "\n";

  const auto& record = outcome.path;
  for (std::size_t i = 0; i < record.states.size(); ++i) {
    const double s = grid.time_node(static_cast<int>(i));
    const Vec* weights = nullptr;
    if (record.regimes[i] == Regime::continuous && i < outcome.strategy.theta_timeline.size() &&
        outcome.strategy.theta_timeline[i])
      weights = &outcome.continuous_grid[*outcome.strategy.theta_timeline[i]];
    else if (record.regimes[i] == Regime::max_impulse) {
      for (const auto& imp : outcome.strategy.max_impulses)
        if (!imp.placeholder && imp.time == s) weights = &outcome.market_grid[imp.grid_index];
    } else if (record.regimes[i] == Regime::min_impulse) {
      for (const auto& imp : outcome.strategy.min_impulses)
        if (!imp.placeholder && imp.time == s) weights = &outcome.investor_grid[imp.grid_index];
    }
    out << format_double(s) << "," << format_double(record.states[i][0]) << ","
        << regime_name(record.regimes[i]);
    for (std::size_t k = 0; k < N; ++k)
      out << "," << (weights ? format_double((*weights)[k]) : std::string(""));
    out << "\n";
  }
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  dump_json(path, json{{"command", manifest.command},
                       {"config_checksum", manifest.config_checksum},
                       {"tool_version", kToolVersion},
                       {"started_at", manifest.started_at},
                       {"finished_at", manifest.finished_at},
                       {"wall_seconds", manifest.wall_seconds},
                       {"problem", manifest.problem_summary},
                       {"grid", manifest.grid_spec},
                       {"solver", manifest.solver_spec},
                       {"outputs", manifest.outputs},
                       {"warnings", manifest.warnings}});
}

std::string iso_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

}  // namespace hjbi
