#include "dbs/channel.hpp"

#include <cmath>
#include <string>

#include "dbs/error.hpp"
#include "dbs/units.hpp"

namespace dbs::channel {

using units::kPi;

double Environment::constant_term_db() const {
  return eta_nlos_db + 20.0 * std::log10(4.0 * kPi * fc_hz / units::kSpeedOfLight);
}

void Environment::validate() const {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("environment: a and b must be positive");
  if (!(fc_hz > 0.0)) throw DomainError("environment: carrier frequency must be positive");
  if (!(h_max_m > 0.0)) throw DomainError("environment: h_max must be positive");
  if (!(eta_nlos_db >= eta_los_db)) throw DomainError("environment: eta_nlos must be >= eta_los");
  if (!std::isfinite(epsilon_dbm)) throw DomainError("environment: epsilon must be finite");
}

Environment preset(std::string_view name) {
  if (name == "urban") return Environment{};
  throw ConfigError("unknown environment preset '" + std::string(name) + "'");
}

LinkGeometry::LinkGeometry(double h_m, double r_m) : h_(h_m), r_(r_m) {
  if (!(h_m > 0.0) || !std::isfinite(h_m)) throw DomainError("link geometry: altitude must be > 0");
  if (!(r_m >= 0.0) || !std::isfinite(r_m)) throw DomainError("link geometry: radial distance must be >= 0");
}

double LinkGeometry::distance() const { return std::hypot(h_, r_); }

double LinkGeometry::elevation() const { return r_ == 0.0 ? kPi / 2.0 : std::atan(h_ / r_); }

double los_probability(double theta_rad, const Environment& env) {
  if (!(theta_rad >= 0.0 && theta_rad <= kPi / 2.0)) {
    throw DomainError("los_probability: elevation outside [0, pi/2]");
  }
  const double deg = units::rad_to_deg(theta_rad);
  return 1.0 / (1.0 + env.a * std::exp(-env.b * (deg - env.a)));
}

double nlos_probability(double theta_rad, const Environment& env) {
  return 1.0 - los_probability(theta_rad, env);
}

double fspl_db(double d_m, double fc_hz) {
  if (!(d_m > 0.0)) throw DomainError("fspl_db: distance must be positive");
  return 20.0 * std::log10(4.0 * kPi * fc_hz * d_m / units::kSpeedOfLight);
}

double mean_pathloss_db(const LinkGeometry& geom, const Environment& env) {
  const double p_los = los_probability(geom.elevation(), env);
  return fspl_db(geom.distance(), env.fc_hz) + env.eta_los_db * p_los + env.eta_nlos_db * (1.0 - p_los);
}

double mean_pathloss_db_closed_form(const LinkGeometry& geom, const Environment& env) {
  const double deg = units::rad_to_deg(geom.elevation());
  const double sigmoid = 1.0 + env.a * std::exp(-env.b * (deg - env.a));
  return 20.0 * std::log10(geom.distance()) + env.excess_gap_db() / sigmoid + env.constant_term_db();
}

double received_power_dbm(double pt_dbm, const LinkGeometry& geom, const Environment& env) {
  return pt_dbm - mean_pathloss_db(geom, env);
}

bool is_covered(double pt_dbm, const LinkGeometry& geom, const Environment& env) {
  return mean_pathloss_db(geom, env) <= pt_dbm - env.epsilon_dbm;
}

}  // namespace dbs::channel
