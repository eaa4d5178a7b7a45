#pragma once

// Experiment layer: user generators, the placement <-> beamforming outer
// loop, the equal-grid baseline and Monte Carlo sweeps.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dbs/beamforming.hpp"
#include "dbs/channel.hpp"
#include "dbs/placement.hpp"

namespace dbs::scenario {

using placement::GroundUser;
using placement::Point;

struct AreaConfig {
  enum class Origin { kCentered, kCorner };

  double lx_m = 10000.0;
  double ly_m = 10000.0;
  Origin origin = Origin::kCentered;

  double x_min() const { return origin == Origin::kCentered ? -lx_m / 2.0 : 0.0; }
  double y_min() const { return origin == Origin::kCentered ? -ly_m / 2.0 : 0.0; }
  double x_max() const { return x_min() + lx_m; }
  double y_max() const { return y_min() + ly_m; }
  Point center() const { return {x_min() + lx_m / 2.0, y_min() + ly_m / 2.0}; }
  bool contains(double x, double y) const { return x >= x_min() && x <= x_max() && y >= y_min() && y <= y_max(); }

  void validate() const;
};

struct DistributionSpec {
  enum class Kind { kUniform, kTruncatedGaussian };

  Kind kind = Kind::kUniform;
  double mu_x_m = 0.0;
  double mu_y_m = 0.0;
  double sigma_x_m = 20.0;
  double sigma_y_m = 20.0;

  void validate() const;
};

// K i.i.d. users; the truncated Gaussian is sampled per axis by rejection.
// Throws RejectionStallError when an axis would accept less than 1e-6 of draws.
std::vector<GroundUser> sample_users(std::size_t K, const AreaConfig& area, const DistributionSpec& dist,
                                     std::uint64_t seed);

struct RadioConfig {
  double bandwidth_hz = 1.0e6;
  double noise_dbm = -100.0;
  double beta_bps = 1.0e6;
  std::size_t num_antennas = 4;

  void validate() const;
};

struct BargainingConfig {
  double delta = 1e-3;
  beamforming::KsbsMode mode = beamforming::KsbsMode::kNormalizedGain;
};

struct PipelineOptions {
  placement::PlacementOptions placement;
  BargainingConfig bargaining;
};

struct BargainingGroup {
  std::vector<int> drone_ids;
  std::vector<int> representative_users;  // user ids, one per drone
  beamforming::BargainingOutcome outcome;
};

struct RateEvaluation {
  std::vector<double> per_user_rate_bps;
  std::vector<int> serving_drone;         // drone id with the strongest average signal
  std::vector<bool> rate_satisfied;
  std::vector<double> required_power_w;   // minimum power meeting beta at the served user
  std::vector<BargainingGroup> groups;
  std::size_t unmet_users = 0;
  double avg_rate_bps = 0.0;
};

// Per-user downlink rates for a fixed deployment. Users inside two or more
// coverage disks are served with the bargained beamformers of their
// interfering group; everyone else experiences average (mean pathloss)
// signal and interference. Small-scale fading is drawn from `seed`.
RateEvaluation evaluate_rates(std::span<const GroundUser> users, const placement::PlacementSolution& solution,
                              const channel::Environment& env, const RadioConfig& radio,
                              const BargainingConfig& bargaining, std::uint64_t seed);

// Fading seed used by run_pipeline for a given master seed.
std::uint64_t fading_seed(std::uint64_t seed);

struct TraceEntry {
  int outer_iter = 0;
  std::size_t M = 0;
  std::size_t unmet_users = 0;
};

struct ExperimentReport {
  placement::PlacementSolution solution;
  RateEvaluation rates;
  double aggregate_power_w = 0.0;
  double avg_rate_bps = 0.0;
  std::size_t num_deployed = 0;
  bool all_rates_met = false;
  std::vector<TraceEntry> convergence_trace;
};

// Solves the placement, evaluates rates with bargaining in overlap regions,
// and walks the feasible candidates in ascending power until every user
// meets beta. When none does, the candidate with the fewest unmet users is
// reported with all_rates_met = false. Throws NoFeasibleSolutionError.
ExperimentReport run_pipeline(std::span<const GroundUser> users, const placement::DroneRepository& repo,
                              const channel::Environment& env, const RadioConfig& radio,
                              const PipelineOptions& opts, std::uint64_t seed);

// Grid rows x cols with rows * cols == M and the most square shape.
std::pair<std::size_t, std::size_t> baseline_grid(std::size_t M);

// Equal-subarea placement ignoring user locations. nullopt when the required
// powers cannot be served by the repository.
std::optional<placement::PlacementSolution> voronoi_baseline(std::size_t M, const AreaConfig& area,
                                                             std::span<const GroundUser> users,
                                                             const placement::DroneRepository& repo,
                                                             const channel::Environment& env,
                                                             placement::MatchingStrategy strategy =
                                                                 placement::MatchingStrategy::kBestFit);

struct ScenarioConfig {
  channel::Environment env;
  placement::DroneRepository repo;
  AreaConfig area;
  DistributionSpec distribution;
  std::size_t num_users = 10;
  RadioConfig radio;
  PipelineOptions options;
  std::uint64_t seed = 0;
};

// Seed of trial t; trial 0 reuses the master seed so a one-trial sweep
// reproduces a single solve.
std::uint64_t trial_seed(std::uint64_t master, std::size_t trial);

// Users and report for one trial of a scenario.
std::vector<GroundUser> scenario_users(const ScenarioConfig& cfg, std::uint64_t seed);
ExperimentReport run_scenario(const ScenarioConfig& cfg, std::span<const GroundUser> users, std::uint64_t seed);

enum class SweepVariable { kUsers, kDensity };

struct SweepSpec {
  SweepVariable vary = SweepVariable::kUsers;
  std::vector<double> values;
  std::size_t trials = 1;
  bool voronoi_baseline = false;
  unsigned threads = 0;  // 0: DBS_PLANNER_THREADS or hardware concurrency
};

struct SweepRow {
  double value = 0.0;
  double mean_power_w = 0.0;
  double mean_rate_bps = 0.0;
  double mean_M = 0.0;
  std::size_t trials = 0;    // trials that produced a feasible placement
  std::size_t failures = 0;  // trials without a feasible placement
  double mean_voronoi_power_w = 0.0;
  std::size_t voronoi_infeasible = 0;
};

// Applies one sweep value to a scenario (user count, or hotspot density in
// users per km^2 which sets sigma = sqrt(K / (2 pi rho)) km).
ScenarioConfig apply_sweep_value(const ScenarioConfig& base, SweepVariable vary, double value);

std::vector<SweepRow> sweep(const ScenarioConfig& base, const SweepSpec& spec);

unsigned worker_threads(unsigned requested);

}  // namespace dbs::scenario
