#pragma once

// Slow reference implementations used only by the tests. They share data
// types with the library but none of its algorithms.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "dbs/beamforming.hpp"
#include "dbs/channel.hpp"
#include "dbs/placement.hpp"

namespace oracle {

using dbs::placement::Disk;
using dbs::placement::Point;

// Mean pathloss evaluated term by term in long double.
long double pathloss_db(long double h, long double r, const dbs::channel::Environment& env);

// Elevation angle minimising pathloss(R tan(theta), R) over an n-point grid
// of (0, pi/2).
double theta_grid_argmin(double R, const dbs::channel::Environment& env, std::size_t n);

// Minimum over h in (0, h_max] of the edge power, by grid plus golden refinement.
double min_edge_power_dbm(double R, const dbs::channel::Environment& env);

// Smallest disk among all pair diameters and triple circumcircles that
// encloses every point. O(n^4).
Disk enclosing_disk_enumeration(std::span<const Point> pts);

// Exact 2-center value: minimum over all 2-partitions of the larger
// enclosing radius.
double two_center_exact(std::span<const Point> pts);

// Exact minimum aggregate power (W) over all partitions of the users into at
// most |repo| blocks and all feasible drone assignments. Infinity when none.
double exhaustive_placement_power(std::span<const Point> users, const dbs::placement::DroneRepository& repo,
                                  const dbs::channel::Environment& env);

struct ParetoScan {
  // Largest min_m over the grid of (R_m - d_m) / (max_m - d_m), or R_m / max_m in raw mode.
  double best_min_fraction = 0.0;
  // Largest min_m (R_m - target_m) over the grid.
  double best_dominance = 0.0;
};

// Scans lambda in [0,1]^2 on an n x n grid for a two-player channel with
// beamformers normalise(lambda * MRT + (1 - lambda) * ZF), computed here
// from scratch.
ParetoScan pareto_grid(const dbs::beamforming::InterferenceChannel& ch, std::size_t n,
                       std::span<const double> disagreement, std::span<const double> max_rates,
                       std::span<const double> target, bool raw_fraction);

}  // namespace oracle
