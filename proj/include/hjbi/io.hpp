#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hjbi/config.hpp"
#include "hjbi/game_model.hpp"
#include "hjbi/grid.hpp"
#include "hjbi/nash.hpp"
#include "hjbi/portfolio.hpp"
#include "hjbi/solver.hpp"

namespace hjbi {

inline constexpr const char* kToolVersion = "0.1.0";

// Text formatting carries 17 significant digits so exports round-trip to full
// double precision.
std::string format_double(double x);

std::uint64_t fnv1a64(const std::string& data);
std::string checksum_hex(const std::string& data);

// Long-format value field CSV: s, y1..yn, V, regime, theta/xi/eta indices,
// plus a JSON metadata sidecar with the grid spec and solve tolerances.
void write_value_field_csv(const std::string& path, const TimeSpaceGrid& grid,
                           const ValueField& field);
void write_value_field_meta(const std::string& path, const TimeSpaceGrid& grid,
                            const GameProblem& problem, const SolverConfig& config);
std::pair<TimeSpaceGrid, ValueField> read_value_field(const std::string& csv_path,
                                                      const std::string& meta_path);

void write_solve_report_json(const std::string& path, const SolveReport& report);

// Per-iteration reconciliation residual history (one row per slice sweep);
// written when record_convergence is set.
void write_convergence_csv(const std::string& path, const SolveReport& report);
void write_assumptions_json(const std::string& path, const AssumptionReport& report);

void write_strategy_json(const std::string& path, const NashStrategy& strategy,
                         const TrajectoryRecord& record);
void write_strategy_csv(const std::string& path, const TimeSpaceGrid& grid,
                        const NashStrategy& strategy, const TrajectoryRecord& record);
void write_trajectory_csv(const std::string& path, const TimeSpaceGrid& grid,
                          const TrajectoryRecord& record);

void write_ne_report_json(const std::string& path, const NEReport& report);

void write_refinement_csv(const std::string& path, const RefinementStudy& study);
void write_refinement_json(const std::string& path, const RefinementStudy& study);

void write_residual_csv(const std::string& path, const GameProblem& problem,
                        const TimeSpaceGrid& grid, const ValueField& field);

void write_portfolio_json(const std::string& path, const PortfolioOutcome& outcome);
void write_portfolio_csv(const std::string& path, const TimeSpaceGrid& grid,
                         const PortfolioOutcome& outcome);

struct RunManifest {
  std::string command;
  std::string config_checksum;
  std::string started_at;
  std::string finished_at;
  double wall_seconds = 0.0;
  nlohmann::json problem_summary;
  nlohmann::json grid_spec;
  nlohmann::json solver_spec;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
};

void write_manifest(const std::string& path, const RunManifest& manifest);

std::string iso_timestamp_now();

}  // namespace hjbi
