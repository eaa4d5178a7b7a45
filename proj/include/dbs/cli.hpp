#pragma once

// Run configuration, serialization and the dbs_planner subcommands.
//
// Exit codes: 0 success, 1 configuration or input error, 2 no feasible
// placement, 3 some user below the rate threshold (reports still written).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dbs/beamforming.hpp"
#include "dbs/scenario.hpp"

namespace dbs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitRateUnmet = 3;

struct RunConfig {
  scenario::ScenarioConfig scenario;
  std::filesystem::path output_dir = ".";
};

// Defaults: urban environment, twelve drones in three power classes, 10 km
// square centered area, ten uniform users.
RunConfig default_config();

// Strict JSON reader: unknown keys and wrong types raise ConfigError naming
// the field; syntax errors name the line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& cfg);

// "a..b", "a..b:step" or "v1,v2,...". Throws ConfigError.
std::vector<double> parse_range(std::string_view text);

// Shortest locale-independent form with 17 significant digits.
std::string format_number(double v);

// Channel file: {"M": m, "K": k, "H": [l][m][k] -> [re, im], "sigma2"?: s}.
beamforming::InterferenceChannel parse_channel(std::string_view text);
nlohmann::json outcome_to_json(const beamforming::BargainingOutcome& out, double delta);

nlohmann::json solution_to_json(const RunConfig& cfg, std::span<const placement::GroundUser> users,
                                const scenario::ExperimentReport& report);
std::string solution_csv(const placement::PlacementSolution& sol);

struct LoadedSolution {
  RunConfig config;
  std::vector<placement::GroundUser> users;
  placement::PlacementSolution solution;
};
LoadedSolution load_solution(const nlohmann::json& doc);

// Per-user rates of a saved solution, recomputed from its own config.
scenario::RateEvaluation recompute_rates(const LoadedSolution& saved);

struct SolveArgs {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
};

struct SweepArgs {
  std::optional<std::filesystem::path> config;
  std::string vary = "users";
  std::string values;
  std::size_t trials = 1;
  std::string baseline;  // "" or "voronoi"
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
};

struct ChannelArgs {
  std::string env = "urban";
  std::optional<std::filesystem::path> config;  // environment taken from a run config
  std::string r = "1000,3000";
  std::string h = "1..3000";
  std::optional<double> fc_hz;
  std::optional<std::filesystem::path> out;
};

struct BargainArgs {
  std::optional<std::filesystem::path> channel_file;
  std::vector<std::uint64_t> random;  // M, K, seed
  double delta = 1e-3;
  std::string mode = "normalized_gain";
  std::optional<std::filesystem::path> out;
};

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);
int cmd_channel(const ChannelArgs& args, std::ostream& out, std::ostream& err);
int cmd_bargain(const BargainArgs& args, std::ostream& out, std::ostream& err);

// Entry point behind the dbs_planner executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dbs::cli
