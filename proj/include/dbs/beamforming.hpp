#pragma once

// Downlink beamforming game between interfering drone base stations: rates
// of the MISO interference channel, the maximum-ratio Nash equilibrium, and
// the Kalai-Smorodinsky bargaining point found by bisection.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dbs/rng.hpp"

namespace dbs::beamforming {

using CVector = Eigen::VectorXcd;

struct InterferenceChannel {
  std::size_t M = 0;             // players (drone/user pairs)
  std::size_t num_antennas = 0;  // antennas per drone
  std::vector<CVector> H;        // H[l * M + m]: drone l -> user m
  double sigma2 = 1.0;           // noise power

  InterferenceChannel() = default;
  InterferenceChannel(std::size_t players, std::size_t antennas, double noise);

  const CVector& h(std::size_t l, std::size_t m) const { return H[l * M + m]; }
  CVector& h(std::size_t l, std::size_t m) { return H[l * M + m]; }

  // Throws DimensionMismatchError / ZeroDirectChannelError / DomainError.
  void validate() const;

  // i.i.d. unit-variance circularly-symmetric complex Gaussian entries.
  static InterferenceChannel random(std::size_t players, std::size_t antennas, Rng& rng, double noise = 1.0);
};

using BeamformerSet = std::vector<CVector>;
using RateVector = std::vector<double>;

// R_m = log2(1 + |w_m^T h_mm|^2 / (sigma2 + sum_{l != m} |w_l^T h_lm|^2)).
RateVector rate_vector(const InterferenceChannel& ch, const BeamformerSet& W);

// Maximum-ratio transmission w_m = conj(h_mm) / |h_mm|.
BeamformerSet nash_beamformers(const InterferenceChannel& ch);

// Single-user rates with every other drone silent.
RateVector max_rates(const InterferenceChannel& ch);

struct ParametrizedBeamformer {
  CVector w;
  bool degenerate = false;  // zero-forcing undefined, w is MRT
};

// Two-player boundary family: normalised lambda * MRT + (1 - lambda) * ZF.
ParametrizedBeamformer pareto_parametrized_beamformer(std::size_t m, double lambda, const InterferenceChannel& ch);

enum class KsbsMode {
  kNormalizedGain,  // (R_m - R_m^NE) / (R_m^max - R_m^NE)
  kRawFraction,     // R_m / R_m^max
};

// Per-player bargaining fraction of a rate vector, clamped to <= 1.
RateVector bargaining_fractions(const RateVector& rates, const RateVector& ne, const RateVector& max, KsbsMode mode);

struct FeasibilityResult {
  bool feasible = false;
  BeamformerSet witness;   // beamformers reaching `achieved`
  RateVector rates;        // rates of the witness
  double achieved = 0.0;   // best min-fraction found
  bool solver_failed = false;
};

// Precomputes the best attainable min-fraction of a channel once so repeated
// feasibility queries during bisection are cheap. Exact (up to refinement
// tolerance) for two players; multi-start projected ascent for more.
class FeasibilityOracle {
 public:
  FeasibilityOracle(const InterferenceChannel& ch, KsbsMode mode);

  FeasibilityResult test(double r_prime) const;

  const RateVector& ne_rates() const { return ne_; }
  const RateVector& max_rates() const { return max_; }
  double best_fraction() const { return best_.achieved; }

 private:
  InterferenceChannel ch_;
  KsbsMode mode_;
  RateVector ne_;
  RateVector max_;
  FeasibilityResult best_;
};

// True iff some beamformer set gives every player a fraction strictly above r'.
FeasibilityResult ksbs_feasible(double r_prime, const InterferenceChannel& ch,
                                KsbsMode mode = KsbsMode::kNormalizedGain);

struct BisectionStep {
  double r = 0.0;
  bool feasible = false;
};

struct BargainingOutcome {
  RateVector ne_rates;
  RateVector max_rates;
  RateVector ksbs_rates;
  double fraction = 0.0;         // bisected fraction (last feasible lower bound)
  RateVector fractions_of_max;   // ksbs_rates / max_rates
  BeamformerSet beamformers;     // last feasible witness
  int iterations = 0;
  std::vector<BisectionStep> steps;
};

// Bisection on the bargaining fraction over [0, 1] until the bracket is at
// most delta wide.
BargainingOutcome ksbs_bisection(const InterferenceChannel& ch, double delta,
                                 KsbsMode mode = KsbsMode::kNormalizedGain);

// Minimum transmit power (W) for rate beta over bandwidth W given the linear
// pathloss and the noise-plus-interference power at the receiver.
double min_power_for_rate(double beta_bps, double bandwidth_hz, double pathloss_linear, double noise_w,
                          double interference_w);

}  // namespace dbs::beamforming
