#include "hjbi/runner.hpp"

#include <chrono>
#include <filesystem>

namespace hjbi {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ArtifactSink {
  fs::path dir;
  std::vector<std::string> outputs;

  std::string at(const std::string& name) {
    outputs.push_back((dir / name).string());
    return outputs.back();
  }
};

json problem_summary(const Config& config, const std::string& command) {
  if (command == "portfolio" && config.portfolio) {
    const auto& pp = *config.portfolio;
    return json{{"kind", "portfolio"},
                {"num_stocks", pp.market.num_stocks},
                {"lambda", pp.discount},
                {"horizon", {{"t", pp.t_start}, {"T", pp.t_end}}},
                {"weight_candidates", pp.weight_grid.size()},
                {"initial_wealth", pp.initial_wealth}};
  }
  const auto& game = *config.problem;
  return json{{"kind", "game"},
              {"state_dim", game.state_dim},
              {"lambda", game.discount},
              {"horizon", {{"t", game.t_start}, {"T", game.t_end}}},
              {"continuous_controls", game.continuous_controls.size()},
              {"max_impulses", game.max_impulses.size()},
              {"min_impulses", game.min_impulses.size()}};
}

json grid_spec_json(const GridSpec& spec) {
  json axes = json::array();
  for (const auto& a : spec.axes)
    axes.push_back({{"lo", a.lo}, {"hi", a.hi}, {"count", a.count}});
  return json{{"h", spec.h}, {"space", axes}, {"boundary", boundary_name(spec.boundary)}};
}

json solver_spec_json(const SolverConfig& s) {
  return json{{"tolerance", s.tolerance},
              {"max_iterations", s.max_iterations},
              {"switch_tolerance", s.effective_switch_tolerance()},
              {"record_convergence", s.record_convergence},
              {"allow_large_lambda_h", s.allow_large_lambda_h}};
}

void require_problem(const Config& config, const std::string& command) {
  if (!config.problem)
    throw ConfigError("command \"" + command + "\" needs a [problem] section");
}

}  // namespace

RunResult run_command(const std::string& command, const Config& config,
                      const std::string& raw_config_text, bool strict) {
  RunResult result;
  RunManifest manifest;
  manifest.command = command;
  manifest.config_checksum = checksum_hex(raw_config_text);
  manifest.started_at = iso_timestamp_now();
  manifest.grid_spec = grid_spec_json(config.grid);
  manifest.solver_spec = solver_spec_json(config.solver);
  const auto clock_start = std::chrono::steady_clock::now();

  ArtifactSink sink;
  sink.dir = config.output.directory;

  try {
    std::error_code ec;
    fs::create_directories(sink.dir, ec);
    if (config.output.emit_plots) fs::create_directories(sink.dir / "plots", ec);
    manifest.problem_summary = problem_summary(config, command);

    if (command == "refine") {
      require_problem(config, command);
      if (config.h_list.empty())
        throw ConfigError("refine needs solver.h_list in the config");
      const auto study =
          refinement_study(*config.problem, config.grid.axes, config.grid.boundary, config.h_list,
                           config.solver, config.initial_state.empty() ? nullptr
                                                                       : &config.initial_state);
      for (const auto& w : study.warnings) result.warnings.push_back(w);
      write_refinement_csv(sink.at("refinement.csv"), study);
      write_refinement_json(sink.at("refinement.json"), study);
    } else if (command == "portfolio") {
      if (!config.portfolio)
        throw ConfigError("command \"portfolio\" needs a [portfolio] section");
      const auto& pp = *config.portfolio;
      auto [report, outcome] =
          solve_portfolio(pp, config.grid.axes, config.grid.boundary, config.grid.h, config.solver);
      for (const auto& w : report.warnings) result.warnings.push_back(w);
      const TimeSpaceGrid grid =
          build_grid(pp.t_start, pp.t_end, config.grid.h, config.grid.axes, config.grid.boundary);
      const GameProblem game =
          build_portfolio_game(pp, config.grid.h,
                               {config.grid.axes.front().lo, config.grid.axes.front().hi});
      write_value_field_csv(sink.at("value.csv"), grid, report.field);
      write_value_field_meta(sink.at("value.meta.json"), grid, game, config.solver);
      write_solve_report_json(sink.at("report.json"), report);
      if (config.solver.record_convergence)
        write_convergence_csv(sink.at("convergence.csv"), report);
      write_portfolio_json(sink.at("portfolio.json"), outcome);
      write_portfolio_csv(sink.at("portfolio_strategy.csv"), grid, outcome);
      write_trajectory_csv(sink.at("trajectory.csv"), grid, outcome.path);
      if (config.output.emit_plots) {
        write_value_field_csv(sink.at("plots/value_surface.csv"), grid, report.field);
        write_residual_csv(sink.at("plots/residual_heatmap.csv"), game, grid, report.field);
        write_trajectory_csv(sink.at("plots/path_overlay.csv"), grid, outcome.path);
      }
      if (outcome.path.truncated) {
        result.warnings.push_back("optimal path truncated: " + outcome.path.diagnostic);
        result.exit_code = kExitRuntimeTrouble;
      }
    } else if (command == "solve" || command == "extract" || command == "verify") {
      require_problem(config, command);
      const GameProblem& game = *config.problem;
      const TimeSpaceGrid grid = config.grid.build(game.t_start, game.t_end);

      const AssumptionReport assumptions = validate_assumptions(game, grid);
      write_assumptions_json(sink.at("assumptions.json"), assumptions);
      for (const auto& v : assumptions.violations)
        result.warnings.push_back("assumption " + v.assumption + " violated at " + v.witness);

      const SolveReport report = backward_sweep(game, grid, config.solver);
      for (const auto& w : report.warnings) result.warnings.push_back(w);
      write_value_field_csv(sink.at("value.csv"), grid, report.field);
      write_value_field_meta(sink.at("value.meta.json"), grid, game, config.solver);
      write_solve_report_json(sink.at("report.json"), report);
      if (config.solver.record_convergence)
        write_convergence_csv(sink.at("convergence.csv"), report);
      if (config.output.emit_plots) {
        write_value_field_csv(sink.at("plots/value_surface.csv"), grid, report.field);
        write_residual_csv(sink.at("plots/residual_heatmap.csv"), game, grid, report.field);
      }

      if (command == "extract" || command == "verify") {
        const auto eq = extract_equilibrium(game, grid, report, config.initial_state,
                                            config.solver);
        write_strategy_json(sink.at("strategy.json"), eq.strategy, eq.path);
        write_strategy_csv(sink.at("strategy.csv"), grid, eq.strategy, eq.path);
        write_trajectory_csv(sink.at("trajectory.csv"), grid, eq.path);
        if (config.output.emit_plots)
          write_trajectory_csv(sink.at("plots/path_overlay.csv"), grid, eq.path);
        if (eq.path.truncated) {
          result.warnings.push_back("optimal path truncated: " + eq.path.diagnostic);
          result.exit_code = kExitRuntimeTrouble;
        }
      }
      if (command == "verify" && result.exit_code == kExitOk) {
        const NEReport ne =
            verify_equilibrium(game, grid, report, config.initial_state, config.output.deviations,
                               config.output.seed, config.output.ne_tolerance, config.solver);
        write_ne_report_json(sink.at("ne_report.json"), ne);
        if (!ne.pass) result.warnings.push_back("equilibrium audit failed; see ne_report.json");
      }
    } else {
      throw ConfigError("unknown command \"" + command +
                        "\" (expected solve|extract|verify|refine|portfolio)");
    }
  } catch (const ConfigError& e) {
    result.exit_code = kExitConfigError;
    result.error = e.what();
    return result;
  } catch (const DomainError& e) {
    result.exit_code = kExitRuntimeTrouble;
    result.error = e.what();
    return result;
  }

  if (strict && !result.warnings.empty() && result.exit_code == kExitOk)
    result.exit_code = kExitRuntimeTrouble;

  manifest.finished_at = iso_timestamp_now();
  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  manifest.outputs = sink.outputs;
  manifest.warnings = result.warnings;
  write_manifest((sink.dir / "manifest.json").string(), manifest);
  result.outputs = sink.outputs;
  result.outputs.push_back((sink.dir / "manifest.json").string());
  return result;
}

}  // namespace hjbi
