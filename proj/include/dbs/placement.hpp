#pragma once

// Selection and 3D placement of heterogeneous drone base stations: k-center
// style disk covering of the users, conversion of disk radii to power and
// altitude, and assignment of disks to drones from a repository.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dbs/altitude.hpp"
#include "dbs/channel.hpp"
#include "dbs/geometry.hpp"
#include "dbs/rng.hpp"

namespace dbs::placement {

struct GroundUser {
  int id = 0;
  double x = 0.0;
  double y = 0.0;

  Point position() const { return {x, y}; }
};

std::vector<Point> positions(std::span<const GroundUser> users);

struct DroneSpec {
  int type_id = 0;
  double p_min_dbm = -std::numeric_limits<double>::infinity();
  double p_max_dbm = 0.0;
};

// One entry per physical drone; the drone id is the index.
using DroneRepository = std::vector<DroneSpec>;

struct DroneType {
  double p_min_dbm = -std::numeric_limits<double>::infinity();
  double p_max_dbm = 0.0;
  int count = 1;
};

// Expands drone types into a repository; type ids follow the input order.
DroneRepository make_repository(std::span<const DroneType> types);

struct Deployment {
  int drone_id = 0;
  int type_id = 0;
  double x = 0.0;
  double y = 0.0;
  double h = 0.0;  // altitude in use, m
  double R = 0.0;  // coverage radius, m
  double pt_dbm = 0.0;

  Point ground() const { return {x, y}; }
};

struct PlacementSolution {
  std::vector<Deployment> deployments;
  // partition[j] is the drone id serving users[j] in the covering.
  std::vector<int> partition;
  double aggregate_power_w = 0.0;
  std::size_t M = 0;
};

// ---------------------------------------------------------------------------
// k-center machinery

// Index of the nearest center for every user; ties go to the lower index.
std::vector<std::size_t> assign_to_nearest(std::span<const Point> users, std::span<const Point> centers);

struct LloydResult {
  std::vector<Point> centers;
  std::vector<std::size_t> partition;  // cell index per user
  std::vector<double> radii;           // enclosing radius per cell, 0 when empty
  int iterations = 0;
  bool converged = false;
  std::vector<double> max_radius_trace;  // largest radius after each update

  double max_radius() const;
  double sum_radii() const;
};

// Alternates nearest-center assignment and 1-center updates until the
// partition is stable or max_iters updates were made. Empty cells keep their
// previous center. M is init_centers.size().
LloydResult lloyd_kcenter(std::span<const Point> users, std::span<const Point> init_centers, int max_iters);

struct KCenterOptions {
  int restarts = 32;
  int max_iters = 100;
};

// Gonzalez farthest-point seeding starting from a random user.
std::vector<Point> farthest_point_seeds(std::span<const Point> users, std::size_t M, Rng& rng);
// M users drawn uniformly (distinct while possible).
std::vector<Point> random_user_seeds(std::span<const Point> users, std::size_t M, Rng& rng);

// Best of one farthest-point run, restarts-1 random runs and an optional warm
// start, ranked by (max radius, sum of radii).
LloydResult kcenter_multistart(std::span<const Point> users, std::size_t M, const KCenterOptions& opts, Rng& rng,
                               std::span<const Point> warm_start = {});

struct DiskCover {
  std::vector<Disk> disks;           // descending radius
  std::vector<std::size_t> owner;    // disk index per user
};

// Repeatedly solves the k-center problem, freezes the largest disk with every
// user it encloses, and continues on the rest with one disk fewer. When a
// frozen radius exceeds radius_cap, or `abandon` returns true for the disks
// frozen so far and the count still to place, the covering is abandoned (nullopt).
using AbandonPredicate = std::function<bool(std::span<const Disk> frozen, std::size_t disks_left)>;
std::optional<DiskCover> recursive_radius_minimization(std::span<const Point> users, std::size_t M,
                                                       const KCenterOptions& opts, Rng& rng,
                                                       double radius_cap = std::numeric_limits<double>::infinity(),
                                                       const AbandonPredicate& abandon = {});

// ---------------------------------------------------------------------------
// Drone matching and the full selection loop

enum class MatchingStrategy { kBestFit, kFirstFit };

struct MatchedDisk {
  std::size_t drone = 0;  // index into the repository
  altitude::AltitudeSolution altitude;
};

// Converts each radius to its required power and assigns an unused drone
// whose [p_min, p_max] interval contains it. nullopt when some disk cannot be
// served. Result is aligned with `radii`.
std::optional<std::vector<MatchedDisk>> match_drones(std::span<const double> radii, const DroneRepository& repo,
                                                     const altitude::AltitudeSolver& solver,
                                                     MatchingStrategy strategy = MatchingStrategy::kBestFit);

struct PlacementOptions {
  KCenterOptions kcenter;
  MatchingStrategy matching = MatchingStrategy::kBestFit;
  std::uint64_t seed = 0;
  // Skip disk counts whose partial power already exceeds the best complete
  // candidate. The best solution is unchanged; the candidate list shrinks.
  bool prune_by_power = true;
};

struct PlacementResult {
  PlacementSolution best;
  // Feasible candidates by ascending aggregate power (best first); complete
  // only when prune_by_power is off.
  std::vector<PlacementSolution> candidates;
};

// Tries disk counts from min(N, distinct users) down to 1 and keeps the
// feasible covering with the least aggregate linear power. Throws NoFeasibleSolutionError when none exists.
PlacementResult solve_placement(std::span<const GroundUser> users, const DroneRepository& repo,
                                const channel::Environment& env, const PlacementOptions& opts = {});

// Builds a solution for a fixed set of disks. nullopt when matching fails.
std::optional<PlacementSolution> build_solution(std::span<const Disk> disks, std::span<const std::size_t> owner,
                                                const DroneRepository& repo, const altitude::AltitudeSolver& solver,
                                                MatchingStrategy strategy);

double aggregate_power_w(std::span<const Deployment> deployments);

}  // namespace dbs::placement
