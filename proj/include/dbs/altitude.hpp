#pragma once

// Coverage radius <-> (transmit power, altitude) under the mean-pathloss
// channel, with the flight-altitude cap applied.

#include "dbs/channel.hpp"

namespace dbs::altitude {

struct AltitudeSolution {
  double theta_opt = 0.0;  // rad
  double h_opt = 0.0;      // m, R * tan(theta_opt)
  double h_used = 0.0;     // m, min(h_opt, h_max)
  double R = 0.0;          // m
  double pt_dbm = 0.0;
};

// Radii below this are lifted to it before evaluating the pathloss, which
// diverges as the slant distance goes to zero.
inline constexpr double kMinCoverageRadius = 1.0;

// Residual of the stationarity condition d(Gamma)/d(theta) = 0 at fixed R,
// scaled so the first term is tan(theta).
double elevation_residual(double theta_rad, const channel::Environment& env);

// Elevation angle minimising the pathloss at the coverage edge. It depends on
// the environment only. Throws NoRootError when eta_los >= eta_nlos.
double optimal_elevation_angle(const channel::Environment& env);

// Transmit power needed to place the coverage edge at R when hovering at h.
double edge_power_dbm(double h_m, double R_m, const channel::Environment& env);

// Caches the optimal elevation angle of one environment.
class AltitudeSolver {
 public:
  explicit AltitudeSolver(const channel::Environment& env);

  const channel::Environment& environment() const { return env_; }
  double theta_opt() const { return theta_opt_; }

  AltitudeSolution radius_to_power(double R_m) const;
  // Largest radius whose required power does not exceed pt_dbm. Throws
  // NoCoverageError when even the smallest radius needs more.
  AltitudeSolution power_to_radius(double pt_dbm) const;

 private:
  channel::Environment env_;
  double theta_opt_;
};

AltitudeSolution radius_to_power(double R_m, const channel::Environment& env);
AltitudeSolution power_to_radius(double pt_dbm, const channel::Environment& env);

}  // namespace dbs::altitude
