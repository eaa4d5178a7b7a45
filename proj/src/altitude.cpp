#include "dbs/altitude.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <boost/math/tools/roots.hpp>

#include "dbs/error.hpp"
#include "dbs/units.hpp"

namespace dbs::altitude {

using channel::Environment;
using units::kPi;

double elevation_residual(double theta_rad, const Environment& env) {
  const double e = std::exp(-env.b * (units::rad_to_deg(theta_rad) - env.a));
  const double denom = env.a * e + 1.0;
  return std::tan(theta_rad) +
         9.0 * std::log(10.0) * env.a * env.b * env.excess_gap_db() * e / (kPi * denom * denom);
}

double optimal_elevation_angle(const Environment& env) {
  env.validate();
  if (!(env.excess_gap_db() < 0.0)) {
    throw NoRootError("optimal_elevation_angle: eta_los must be strictly below eta_nlos");
  }
  const auto f = [&env](double t) { return elevation_residual(t, env); };

  // f < 0 near 0 and f -> +inf near pi/2; take the first sign change on a scan.
  constexpr int kScan = 4096;
  const double hi_end = kPi / 2.0 * (1.0 - 1e-12);
  double lo = 0.0;
  double f_lo = f(lo);
  double hi = lo;
  bool bracketed = false;
  for (int i = 1; i <= kScan; ++i) {
    hi = hi_end * static_cast<double>(i) / kScan;
    const double f_hi = f(hi);
    if ((f_lo < 0.0) != (f_hi < 0.0)) {
      bracketed = true;
      break;
    }
    lo = hi;
    f_lo = f_hi;
  }
  if (!bracketed) throw NoRootError("optimal_elevation_angle: no sign change on (0, pi/2)");

  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), max_iter);
  const double root = 0.5 * (a + b);
  if (!(std::abs(f(root)) < 1e-10)) {
    throw NoRootError("optimal_elevation_angle: root refinement did not converge");
  }
  return root;
}

double edge_power_dbm(double h_m, double R_m, const Environment& env) {
  const channel::LinkGeometry geom(h_m, R_m);
  return channel::mean_pathloss_db_closed_form(geom, env) + env.epsilon_dbm;
}

AltitudeSolver::AltitudeSolver(const Environment& env) : env_(env), theta_opt_(optimal_elevation_angle(env)) {}

AltitudeSolution AltitudeSolver::radius_to_power(double R_m) const {
  if (!(R_m >= 0.0) || !std::isfinite(R_m)) throw DomainError("radius_to_power: radius must be finite and >= 0");
  AltitudeSolution s;
  s.theta_opt = theta_opt_;
  s.R = std::max(R_m, kMinCoverageRadius);
  s.h_opt = s.R * std::tan(theta_opt_);
  s.h_used = std::min(s.h_opt, env_.h_max_m);
  s.pt_dbm = edge_power_dbm(s.h_used, s.R, env_);
  return s;
}

AltitudeSolution AltitudeSolver::power_to_radius(double pt_dbm) const {
  if (!std::isfinite(pt_dbm)) throw DomainError("power_to_radius: power must be finite");
  double lo = kMinCoverageRadius;
  if (radius_to_power(lo).pt_dbm > pt_dbm) {
    throw NoCoverageError("power_to_radius: transmit power too low to cover any disk");
  }
  double hi = 2.0 * lo;
  while (radius_to_power(hi).pt_dbm <= pt_dbm) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw NoCoverageError("power_to_radius: radius unbounded");
  }
  // Required power is strictly increasing in R, so bisection brackets the edge.
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (radius_to_power(mid).pt_dbm <= pt_dbm) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return radius_to_power(lo);
}

AltitudeSolution radius_to_power(double R_m, const Environment& env) {
  return AltitudeSolver(env).radius_to_power(R_m);
}

AltitudeSolution power_to_radius(double pt_dbm, const Environment& env) {
  return AltitudeSolver(env).power_to_radius(pt_dbm);
}

}  // namespace dbs::altitude
