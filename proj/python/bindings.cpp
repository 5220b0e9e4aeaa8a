// Python bindings for the game solver: the batch operations (solve, extract,
// verify, refine, portfolio) driven by JSON config text, plus the file-writing
// run() front door.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "hjbi/runner.hpp"

namespace py = pybind11;
using namespace hjbi;

namespace {

struct PySolveResult {
  py::array_t<double> values;       // (time nodes, space nodes)
  py::array_t<double> time_nodes;   // (I,)
  py::array_t<double> space_nodes;  // (J, n)
  std::vector<std::string> regimes;
  double max_residual = 0.0;
  bool converged = true;
  std::vector<std::string> warnings;
};

Config config_from_text(const std::string& text) {
  return parse_config(nlohmann::json::parse(text));
}

std::pair<GameProblem, TimeSpaceGrid> problem_and_grid(const Config& config) {
  if (!config.problem) throw ConfigError("config needs a [problem] section");
  const GameProblem& game = *config.problem;
  return {game, config.grid.build(game.t_start, game.t_end)};
}

PySolveResult wrap_report(const TimeSpaceGrid& grid, const SolveReport& report) {
  PySolveResult out;
  const int I = report.field.num_time_nodes;
  const auto J = static_cast<py::ssize_t>(report.field.num_space_nodes);
  out.values = py::array_t<double>({static_cast<py::ssize_t>(I), J});
  std::copy(report.field.values.begin(), report.field.values.end(),
            out.values.mutable_data());
  out.time_nodes = py::array_t<double>(I);
  for (int i = 0; i < I; ++i) out.time_nodes.mutable_data()[i] = grid.time_node(i);
  out.space_nodes = py::array_t<double>({J, static_cast<py::ssize_t>(grid.dim())});
  for (py::ssize_t j = 0; j < J; ++j) {
    const Vec y = grid.space_node(static_cast<std::size_t>(j));
    for (int d = 0; d < grid.dim(); ++d)
      out.space_nodes.mutable_data()[j * grid.dim() + d] = y[d];
  }
  out.regimes.reserve(report.field.regime.size());
  for (Regime r : report.field.regime) out.regimes.push_back(regime_name(r));
  out.max_residual = report.max_residual;
  out.converged = report.converged;
  out.warnings = report.warnings;
  return out;
}

py::dict impulse_dict(const Impulse& imp) {
  py::dict d;
  d["time"] = imp.time;
  d["value"] = imp.value;
  d["grid_index"] = imp.grid_index;
  d["placeholder"] = imp.placeholder;
  return d;
}

py::dict extraction_dict(const TimeSpaceGrid& grid, const ExtractionResult& eq) {
  py::dict d;
  const auto steps = static_cast<py::ssize_t>(eq.path.states.size());
  py::array_t<double> states({steps, static_cast<py::ssize_t>(grid.dim())});
  for (py::ssize_t i = 0; i < steps; ++i)
    for (int k = 0; k < grid.dim(); ++k)
      states.mutable_data()[i * grid.dim() + k] = eq.path.states[i][k];
  d["states"] = states;
  d["realized_values"] = eq.path.realized_values;
  std::vector<std::string> regimes;
  for (Regime r : eq.path.regimes) regimes.push_back(regime_name(r));
  d["regimes"] = regimes;
  d["payoff"] = eq.path.payoff;
  d["truncated"] = eq.path.truncated;
  py::list timeline;
  for (const auto& idx : eq.strategy.theta_timeline)
    timeline.append(idx ? py::cast(*idx) : py::none());
  d["theta_timeline"] = timeline;
  py::list maxi, mini;
  for (const auto& imp : eq.strategy.max_impulses) maxi.append(impulse_dict(imp));
  for (const auto& imp : eq.strategy.min_impulses) mini.append(impulse_dict(imp));
  d["max_impulses"] = maxi;
  d["min_impulses"] = mini;
  return d;
}

PySolveResult py_solve(const std::string& config_text) {
  const Config config = config_from_text(config_text);
  auto [game, grid] = problem_and_grid(config);
  return wrap_report(grid, backward_sweep(game, grid, config.solver));
}

py::dict py_extract(const std::string& config_text) {
  const Config config = config_from_text(config_text);
  auto [game, grid] = problem_and_grid(config);
  const SolveReport report = backward_sweep(game, grid, config.solver);
  const ExtractionResult eq =
      extract_equilibrium(game, grid, report, config.initial_state, config.solver);
  return extraction_dict(grid, eq);
}

py::dict py_verify(const std::string& config_text) {
  const Config config = config_from_text(config_text);
  auto [game, grid] = problem_and_grid(config);
  const SolveReport report = backward_sweep(game, grid, config.solver);
  const NEReport ne =
      verify_equilibrium(game, grid, report, config.initial_state, config.output.deviations,
                         config.output.seed, config.output.ne_tolerance, config.solver);
  py::dict d;
  d["value_at_start"] = ne.value_at_start;
  d["equilibrium_payoff"] = ne.equilibrium_payoff;
  d["value_match_error"] = ne.value_match_error;
  d["worst_max_improvement"] = ne.worst_max_improvement;
  d["worst_min_improvement"] = ne.worst_min_improvement;
  d["deviations_per_side"] = ne.deviations_per_side;
  d["tolerance"] = ne.tolerance;
  d["pass"] = ne.pass;
  return d;
}

py::list py_refine(const std::string& config_text) {
  const Config config = config_from_text(config_text);
  if (!config.problem) throw ConfigError("config needs a [problem] section");
  if (config.h_list.empty()) throw ConfigError("refine needs solver.h_list");
  const auto study = refinement_study(
      *config.problem, config.grid.axes, config.grid.boundary, config.h_list, config.solver,
      config.initial_state.empty() ? nullptr : &config.initial_state);
  py::list rows;
  for (const auto& row : study.rows) {
    py::dict d;
    d["h"] = row.h;
    d["sup_diff_to_finest"] = row.sup_diff;
    d["iterations"] = row.iterations;
    d["value_at_probe"] = row.value_at_probe;
    rows.append(d);
  }
  py::dict meta;
  meta["monotone_trend"] = study.monotone_trend;
  rows.append(meta);
  return rows;
}

py::dict py_portfolio(const std::string& config_text) {
  const Config config = config_from_text(config_text);
  if (!config.portfolio) throw ConfigError("config needs a [portfolio] section");
  const auto& pp = *config.portfolio;
  auto [report, outcome] =
      solve_portfolio(pp, config.grid.axes, config.grid.boundary, config.grid.h, config.solver);
  const TimeSpaceGrid grid =
      build_grid(pp.t_start, pp.t_end, config.grid.h, config.grid.axes, config.grid.boundary);
  py::dict d;
  d["initial_wealth"] = outcome.initial_wealth;
  d["worst_case_value"] = outcome.worst_case_value;
  d["value"] = wrap_report(grid, report);
  ExtractionResult eq;
  eq.strategy = outcome.strategy;
  eq.path = outcome.path;
  d["equilibrium"] = extraction_dict(grid, eq);
  d["weight_grid"] = outcome.continuous_grid;
  return d;
}

py::dict py_run(const std::string& command, const std::string& config_path,
                std::optional<std::string> output_dir, bool strict) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file: " + config_path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  Config config = config_from_text(buffer.str());
  if (output_dir) config.output.directory = *output_dir;
  const RunResult result = run_command(command, config, buffer.str(), strict);
  py::dict d;
  d["exit_code"] = result.exit_code;
  d["outputs"] = result.outputs;
  d["warnings"] = result.warnings;
  d["error"] = result.error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Grid solver for zero-sum differential games with impulse controls";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_RuntimeError);

  py::class_<PySolveResult>(m, "SolveResult")
      .def_readonly("values", &PySolveResult::values)
      .def_readonly("time_nodes", &PySolveResult::time_nodes)
      .def_readonly("space_nodes", &PySolveResult::space_nodes)
      .def_readonly("regimes", &PySolveResult::regimes)
      .def_readonly("max_residual", &PySolveResult::max_residual)
      .def_readonly("converged", &PySolveResult::converged)
      .def_readonly("warnings", &PySolveResult::warnings);

  m.def("solve", &py_solve, py::arg("config"),
        "Run the backward sweep for the [problem] section of a JSON config string");
  m.def("extract", &py_extract, py::arg("config"),
        "Solve, then extract the equilibrium strategy and optimal path");
  m.def("verify", &py_verify, py::arg("config"),
        "Solve, extract, and audit the equilibrium against seeded deviations");
  m.def("refine", &py_refine, py::arg("config"),
        "Step-size refinement study over solver.h_list; last entry holds the trend flag");
  m.def("portfolio", &py_portfolio, py::arg("config"),
        "Solve the worst-case portfolio game from the [portfolio] section");
  m.def("run", &py_run, py::arg("command"), py::arg("config_path"),
        py::arg("output_dir") = py::none(), py::arg("strict") = false,
        "File-writing front door; mirrors the hjbi command line tool");

  m.attr("__version__") = kToolVersion;
}
