#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hjbi/game_model.hpp"
#include "hjbi/grid.hpp"
#include "hjbi/portfolio.hpp"
#include "hjbi/solver.hpp"

namespace hjbi {

struct GridSpec {
  double h = 0.1;
  std::vector<AxisSpec> axes;
  BoundaryPolicy boundary = BoundaryPolicy::error;

  TimeSpaceGrid build(double t, double T) const { return build_grid(t, T, h, axes, boundary); }
};

struct OutputSpec {
  std::string directory = "out";
  bool emit_plots = false;
  std::uint64_t seed = 1;
  int deviations = 100;
  double ne_tolerance = 1e-6;
};

// Parsed and assembled run configuration. Sections: problem, grid, solver,
// portfolio, output. Unknown keys anywhere are a hard error.
struct Config {
  std::optional<GameProblem> problem;
  Vec initial_state;
  GridSpec grid;
  SolverConfig solver;
  std::vector<double> h_list;  // refine command
  std::optional<PortfolioProblem> portfolio;
  OutputSpec output;
  nlohmann::json raw;
};

Config parse_config(const nlohmann::json& doc);
Config load_config(const std::string& path);

// Flag overrides applied on top of the config file.
struct Overrides {
  std::optional<double> h;
  std::optional<double> tolerance;
  std::optional<int> max_iterations;
  std::optional<std::string> output_directory;
  std::optional<bool> emit_plots;
  std::optional<std::string> boundary;
  std::optional<std::uint64_t> seed;
};

void apply_overrides(Config& config, const Overrides& overrides);

}  // namespace hjbi
