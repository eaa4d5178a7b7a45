#include "dbs/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dbs/error.hpp"

namespace dbs::beamforming {
namespace {

constexpr double kLn2 = 0.69314718055994530942;

double inner_sq(const CVector& w, const CVector& h) { return std::norm((w.array() * h.array()).sum()); }

CVector mrt(const CVector& h) { return h.conjugate() / h.norm(); }

bool degenerate_player(double ne, double max) { return max - ne <= 1e-12 * std::max(1.0, max); }

double fraction_of(double rate, double ne, double max, KsbsMode mode) {
  double g;
  if (mode == KsbsMode::kRawFraction) {
    g = rate / max;
  } else if (degenerate_player(ne, max)) {
    // Already at its single-user optimum; only interference can move it down.
    g = 1.0 + (rate - ne) / std::max(max, 1e-300);
  } else {
    g = (rate - ne) / (max - ne);
  }
  return std::min(g, 1.0);
}

double min_fraction(const RateVector& R, const RateVector& ne, const RateVector& max, KsbsMode mode) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < R.size(); ++m) g = std::min(g, fraction_of(R[m], ne[m], max[m], mode));
  return g;
}

// d(fraction)/d(rate) for player m.
double fraction_slope(double ne, double max, KsbsMode mode) {
  if (mode == KsbsMode::kRawFraction) return 1.0 / max;
  if (degenerate_player(ne, max)) return 1.0 / std::max(max, 1e-300);
  return 1.0 / (max - ne);
}

// Boundary family used by the two-player search. When zero-forcing is
// undefined the family degrades to power scaling of MRT, which keeps the
// lambda = 0 end interference-free.
CVector family_beam(std::size_t m, double lambda, const InterferenceChannel& ch) {
  const ParametrizedBeamformer p = pareto_parametrized_beamformer(m, lambda, ch);
  if (!p.degenerate) return p.w;
  return std::sqrt(std::clamp(lambda, 0.0, 1.0)) * p.w;
}

FeasibilityResult solve_two_player(const InterferenceChannel& ch, const RateVector& ne, const RateVector& max,
                                   KsbsMode mode) {
  // Along the family the MRT share grows with lambda, so player m's own
  // signal and its leakage onto the other user are both nondecreasing in
  // lambda_m. Hence f_1 rises in lambda_1 and falls in lambda_2 (and
  // symmetrically for f_2): for fixed lambda_1 the best lambda_2 is where the
  // two fractions cross, and the optimum lies on that ridge.
  const auto fractions = [&](double l1, double l2) {
    const RateVector R = rate_vector(ch, BeamformerSet{family_beam(0, l1, ch), family_beam(1, l2, ch)});
    return std::pair{fraction_of(R[0], ne[0], max[0], mode), fraction_of(R[1], ne[1], max[1], mode)};
  };
  const auto ridge = [&](double l1) {
    double lo = 0.0, hi = 1.0;
    auto [f1, f2] = fractions(l1, 1.0);
    if (f1 >= f2) return std::pair{1.0, f2};
    std::tie(f1, f2) = fractions(l1, 0.0);
    if (f1 <= f2) return std::pair{0.0, f1};
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      std::tie(f1, f2) = fractions(l1, mid);
      (f1 > f2 ? lo : hi) = mid;
    }
    const auto [a1, a2] = fractions(l1, lo);
    const auto [b1, b2] = fractions(l1, hi);
    return std::min(a1, a2) >= std::min(b1, b2) ? std::pair{lo, std::min(a1, a2)} : std::pair{hi, std::min(b1, b2)};
  };

  constexpr int kScan = 401;
  const double cell = 1.0 / (kScan - 1);
  int bi = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kScan; ++i) {
    const double g = ridge(i * cell).second;
    if (g > best) {
      best = g;
      bi = i;
    }
  }

  // Golden-section refinement of the ridge value around the best scan point.
  constexpr double kInvPhi = 0.61803398874989484820;
  double a = std::max(0.0, (bi - 1) * cell), b = std::min(1.0, (bi + 1) * cell);
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = ridge(c).second, fd = ridge(d).second;
  while (b - a > 1e-10) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = ridge(c).second;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = ridge(d).second;
    }
  }
  double l1 = bi * cell;
  for (double cand : {c, d}) {
    if (ridge(cand).second > ridge(l1).second) l1 = cand;
  }
  const double l2 = ridge(l1).first;

  FeasibilityResult res;
  res.witness = BeamformerSet{family_beam(0, l1, ch), family_beam(1, l2, ch)};
  res.rates = rate_vector(ch, res.witness);
  res.achieved = min_fraction(res.rates, ne, max, mode);
  return res;
}

void project_unit_ball(CVector& w) {
  const double n = w.norm();
  if (n > 1.0) w /= n;
}

// Multi-start projected ascent on a soft-min of the fractions.
FeasibilityResult solve_many_players(const InterferenceChannel& ch, const RateVector& ne, const RateVector& max,
                                     KsbsMode mode) {
  const std::size_t M = ch.M;
  const auto true_obj = [&](const BeamformerSet& W) { return min_fraction(rate_vector(ch, W), ne, max, mode); };

  std::vector<BeamformerSet> starts;
  starts.push_back(nash_beamformers(ch));
  Rng rng(0x6b736273ULL ^ (M * 1315423911ULL) ^ ch.num_antennas);
  std::normal_distribution<double> gauss(0.0, 1.0);
  constexpr int kStarts = 8;
  while (starts.size() < kStarts) {
    BeamformerSet W(M);
    for (auto& w : W) {
      w = CVector(ch.num_antennas);
      for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = {gauss(rng), gauss(rng)};
      w /= w.norm();
    }
    starts.push_back(std::move(W));
  }

  FeasibilityResult best;
  best.achieved = -std::numeric_limits<double>::infinity();
  for (auto W : starts) {
    double current_true = true_obj(W);
    BeamformerSet best_W = W;
    double best_true = current_true;
    for (double tau : {20.0, 60.0, 200.0, 1000.0, 5000.0}) {
      const auto soft = [&](const BeamformerSet& X, RateVector* g_out) {
        const RateVector R = rate_vector(ch, X);
        RateVector g(M);
        for (std::size_t m = 0; m < M; ++m) g[m] = fraction_of(R[m], ne[m], max[m], mode);
        const double gmin = *std::min_element(g.begin(), g.end());
        double s = 0.0;
        for (double v : g) s += std::exp(-tau * (v - gmin));
        if (g_out) *g_out = g;
        return gmin - std::log(s) / tau;
      };
      double step = 0.1;
      double f = soft(W, nullptr);
      for (int it = 0; it < 400; ++it) {
        RateVector g;
        soft(W, &g);
        const double gmin = *std::min_element(g.begin(), g.end());
        std::vector<double> weight(M);
        double wsum = 0.0;
        for (std::size_t m = 0; m < M; ++m) wsum += weight[m] = std::exp(-tau * (g[m] - gmin));
        // Ascent direction per drone (Wirtinger gradient w.r.t. conj(w_l)).
        BeamformerSet dir(M, CVector::Zero(static_cast<Eigen::Index>(ch.num_antennas)));
        for (std::size_t m = 0; m < M; ++m) {
          const double c = weight[m] / wsum * fraction_slope(ne[m], max[m], mode) / kLn2;
          double interf = 0.0;
          for (std::size_t l = 0; l < M; ++l)
            if (l != m) interf += inner_sq(W[l], ch.h(l, m));
          const double noise = ch.sigma2 + interf;
          const double total = noise + inner_sq(W[m], ch.h(m, m));
          for (std::size_t l = 0; l < M; ++l) {
            const std::complex<double> a = ch.h(l, m).transpose() * W[l];
            const double coef = (l == m) ? 1.0 / total : (1.0 / total - 1.0 / noise);
            dir[l] += c * coef * a * ch.h(l, m).conjugate();
          }
        }
        bool improved = false;
        while (step > 1e-12) {
          BeamformerSet trial = W;
          for (std::size_t l = 0; l < M; ++l) {
            trial[l] += step * dir[l];
            project_unit_ball(trial[l]);
          }
          const double ft = soft(trial, nullptr);
          if (ft > f) {
            const double gain = ft - f;
            W = std::move(trial);
            f = ft;
            step *= 1.5;
            improved = gain > 1e-12;
            break;
          }
          step *= 0.5;
        }
        const double t = true_obj(W);
        if (t > best_true) {
          best_true = t;
          best_W = W;
        }
        if (!improved) break;
      }
      W = best_W;
    }
    if (best_true > best.achieved) {
      best.achieved = best_true;
      best.witness = best_W;
    }
  }
  best.rates = rate_vector(ch, best.witness);
  best.achieved = min_fraction(best.rates, ne, max, mode);
  return best;
}

}  // namespace

InterferenceChannel::InterferenceChannel(std::size_t players, std::size_t antennas, double noise)
    : M(players),
      num_antennas(antennas),
      H(players * players, CVector::Zero(static_cast<Eigen::Index>(antennas))),
      sigma2(noise) {}

void InterferenceChannel::validate() const {
  if (M == 0 || num_antennas == 0) throw DimensionMismatchError("interference channel: empty dimensions");
  if (H.size() != M * M) throw DimensionMismatchError("interference channel: expected M*M channel vectors");
  for (const auto& v : H) {
    if (static_cast<std::size_t>(v.size()) != num_antennas) {
      throw DimensionMismatchError("interference channel: channel vector length differs from antenna count");
    }
  }
  if (!(sigma2 > 0.0)) throw DomainError("interference channel: noise power must be positive");
  for (std::size_t m = 0; m < M; ++m) {
    if (h(m, m).norm() == 0.0) throw ZeroDirectChannelError("interference channel: direct channel is zero");
  }
}

InterferenceChannel InterferenceChannel::random(std::size_t players, std::size_t antennas, Rng& rng, double noise) {
  InterferenceChannel ch(players, antennas, noise);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  for (auto& v : ch.H) {
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = {gauss(rng), gauss(rng)};
  }
  return ch;
}

RateVector rate_vector(const InterferenceChannel& ch, const BeamformerSet& W) {
  if (W.size() != ch.M) throw DimensionMismatchError("rate_vector: one beamformer per player required");
  for (const auto& w : W) {
    if (static_cast<std::size_t>(w.size()) != ch.num_antennas) {
      throw DimensionMismatchError("rate_vector: beamformer length differs from antenna count");
    }
  }
  RateVector R(ch.M);
  for (std::size_t m = 0; m < ch.M; ++m) {
    double interference = 0.0;
    for (std::size_t l = 0; l < ch.M; ++l)
      if (l != m) interference += inner_sq(W[l], ch.h(l, m));
    R[m] = std::log2(1.0 + inner_sq(W[m], ch.h(m, m)) / (ch.sigma2 + interference));
  }
  return R;
}

BeamformerSet nash_beamformers(const InterferenceChannel& ch) {
  BeamformerSet W(ch.M);
  for (std::size_t m = 0; m < ch.M; ++m) {
    if (ch.h(m, m).norm() == 0.0) throw ZeroDirectChannelError("nash_beamformers: direct channel is zero");
    W[m] = mrt(ch.h(m, m));
  }
  return W;
}

RateVector max_rates(const InterferenceChannel& ch) {
  RateVector R(ch.M);
  for (std::size_t m = 0; m < ch.M; ++m) R[m] = std::log2(1.0 + ch.h(m, m).squaredNorm() / ch.sigma2);
  return R;
}

ParametrizedBeamformer pareto_parametrized_beamformer(std::size_t m, double lambda, const InterferenceChannel& ch) {
  if (ch.M != 2) throw DimensionMismatchError("pareto_parametrized_beamformer: two players required");
  if (m > 1) throw DimensionMismatchError("pareto_parametrized_beamformer: player index out of range");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("pareto_parametrized_beamformer: lambda outside [0, 1]");
  const CVector& direct = ch.h(m, m);
  const CVector& cross = ch.h(m, 1 - m);
  ParametrizedBeamformer out;
  const CVector w_mrt = mrt(direct);

  // Conjugate of the projection of h_mm onto the orthogonal complement of h_ml,
  // so that w^T h_ml = 0.
  CVector proj = direct;
  const double cross_sq = cross.squaredNorm();
  if (cross_sq > 0.0) proj -= cross * (cross.dot(direct) / cross_sq);
  if (proj.norm() <= 1e-12 * direct.norm()) {
    out.w = w_mrt;
    out.degenerate = true;
    return out;
  }
  const CVector w_zf = proj.conjugate() / proj.norm();
  const CVector mix = lambda * w_mrt + (1.0 - lambda) * w_zf;
  out.w = mix / mix.norm();
  return out;
}

RateVector bargaining_fractions(const RateVector& rates, const RateVector& ne, const RateVector& max, KsbsMode mode) {
  RateVector g(rates.size());
  for (std::size_t m = 0; m < rates.size(); ++m) g[m] = fraction_of(rates[m], ne[m], max[m], mode);
  return g;
}

FeasibilityOracle::FeasibilityOracle(const InterferenceChannel& ch, KsbsMode mode) : ch_(ch), mode_(mode) {
  ch_.validate();
  ne_ = rate_vector(ch_, nash_beamformers(ch_));
  max_ = beamforming::max_rates(ch_);
  if (ch_.M == 1) {
    best_.witness = nash_beamformers(ch_);
    best_.rates = ne_;
    best_.achieved = min_fraction(ne_, ne_, max_, mode_);
  } else if (ch_.M == 2) {
    best_ = solve_two_player(ch_, ne_, max_, mode_);
  } else {
    best_ = solve_many_players(ch_, ne_, max_, mode_);
  }
  if (!std::isfinite(best_.achieved)) best_.solver_failed = true;
}

FeasibilityResult FeasibilityOracle::test(double r_prime) const {
  if (!(r_prime >= 0.0 && r_prime <= 1.0)) throw DomainError("ksbs_feasible: r' outside [0, 1]");
  FeasibilityResult res = best_;
  res.feasible = !best_.solver_failed && best_.achieved > r_prime;
  return res;
}

FeasibilityResult ksbs_feasible(double r_prime, const InterferenceChannel& ch, KsbsMode mode) {
  return FeasibilityOracle(ch, mode).test(r_prime);
}

BargainingOutcome ksbs_bisection(const InterferenceChannel& ch, double delta, KsbsMode mode) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("ksbs_bisection: delta must lie in (0, 1)");
  const FeasibilityOracle oracle(ch, mode);
  BargainingOutcome out;
  out.ne_rates = oracle.ne_rates();
  out.max_rates = oracle.max_rates();
  out.beamformers = nash_beamformers(ch);

  double lo = 0.0, hi = 1.0;
  while (hi - lo > delta) {
    const double mid = 0.5 * (lo + hi);
    const FeasibilityResult res = oracle.test(mid);
    ++out.iterations;
    out.steps.push_back({mid, res.feasible});
    if (res.feasible) {
      lo = mid;
      out.beamformers = res.witness;
    } else {
      hi = mid;
    }
  }
  out.fraction = lo;
  out.ksbs_rates.resize(ch.M);
  out.fractions_of_max.resize(ch.M);
  for (std::size_t m = 0; m < ch.M; ++m) {
    out.ksbs_rates[m] = mode == KsbsMode::kRawFraction
                            ? lo * out.max_rates[m]
                            : out.ne_rates[m] + lo * (out.max_rates[m] - out.ne_rates[m]);
    out.fractions_of_max[m] = out.ksbs_rates[m] / out.max_rates[m];
  }
  return out;
}

double min_power_for_rate(double beta_bps, double bandwidth_hz, double pathloss_linear, double noise_w,
                          double interference_w) {
  if (!(bandwidth_hz > 0.0)) throw DomainError("min_power_for_rate: bandwidth must be positive");
  return (std::exp2(beta_bps / bandwidth_hz) - 1.0) * pathloss_linear * (noise_w + interference_w);
}

}  // namespace dbs::beamforming
