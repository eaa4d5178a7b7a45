#pragma once

// Air-to-ground propagation: LoS probability, mean pathloss and the
// received-power coverage predicate for a low-altitude aerial transmitter.

#include <string_view>

namespace dbs::channel {

struct Environment {
  double a = 9.61;          // sigmoid offset
  double b = 0.16;          // sigmoid slope, 1/deg
  double eta_los_db = 1.0;  // excess loss on LoS links
  double eta_nlos_db = 20.0;
  double fc_hz = 2.0e9;
  double epsilon_dbm = -60.0;  // minimum received power for coverage
  double h_max_m = 3000.0;

  // A = eta_los - eta_nlos (<= 0 for a valid environment).
  double excess_gap_db() const { return eta_los_db - eta_nlos_db; }
  // B = eta_nlos + 20 log10(4 pi fc / c).
  double constant_term_db() const;

  // Throws DomainError when an invariant does not hold.
  void validate() const;
};

// Named presets. Only "urban" is defined; unknown names throw ConfigError.
Environment preset(std::string_view name);
inline Environment urban() { return preset("urban"); }

// Ground-projected link between a drone at altitude h and a receiver at
// horizontal distance r.
class LinkGeometry {
 public:
  LinkGeometry(double h_m, double r_m);

  double altitude() const { return h_; }
  double radial() const { return r_; }
  double distance() const;
  // Elevation angle in radians; pi/2 for a receiver directly underneath.
  double elevation() const;

 private:
  double h_;
  double r_;
};

double los_probability(double theta_rad, const Environment& env);
double nlos_probability(double theta_rad, const Environment& env);

double fspl_db(double d_m, double fc_hz);

// Expected pathloss over LoS/NLoS, evaluated as FSPL + weighted excess loss.
double mean_pathloss_db(const LinkGeometry& geom, const Environment& env);
// Same quantity rearranged as 20 log10(d) + A / (1 + a exp(-b(theta_deg - a))) + B.
double mean_pathloss_db_closed_form(const LinkGeometry& geom, const Environment& env);

double received_power_dbm(double pt_dbm, const LinkGeometry& geom, const Environment& env);

// Boundary counts as covered: pathloss <= pt - epsilon.
bool is_covered(double pt_dbm, const LinkGeometry& geom, const Environment& env);

}  // namespace dbs::channel
