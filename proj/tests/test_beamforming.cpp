#include <doctest.h>

#include <cmath>
#include <random>

#include "dbs/beamforming.hpp"
#include "dbs/error.hpp"
#include "oracles.hpp"

using namespace dbs;
using namespace dbs::beamforming;

namespace {

CVector vec(std::initializer_list<std::complex<double>> v) {
  CVector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (auto c : v) x[i++] = c;
  return x;
}

std::complex<double> tdot(const CVector& w, const CVector& h) { return (w.array() * h.array()).sum(); }

CVector random_unit(std::size_t K, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector w(static_cast<Eigen::Index>(K));
  for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = {g(rng), g(rng)};
  return w / w.norm();
}

InterferenceChannel orthogonal_pair() {
  InterferenceChannel ch(2, 2, 1.0);
  ch.h(0, 0) = vec({1.0, 0.0});
  ch.h(1, 1) = vec({1.0, 0.0});
  ch.h(0, 1) = vec({0.0, 1.0});
  ch.h(1, 0) = vec({0.0, 1.0});
  return ch;
}

}  // namespace

TEST_CASE("rate formula special cases") {
  const InterferenceChannel ch = orthogonal_pair();
  const BeamformerSet W{vec({1.0, 0.0}), vec({1.0, 0.0})};
  const RateVector r = rate_vector(ch, W);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == doctest::Approx(1.0));

  Rng rng(4);
  const InterferenceChannel rnd = InterferenceChannel::random(3, 4, rng);
  BeamformerSet silent(3, CVector::Zero(4));
  silent[1] = random_unit(4, rng);
  CHECK(rate_vector(rnd, silent)[1] == doctest::Approx(std::log2(1.0 + std::norm(tdot(silent[1], rnd.h(1, 1))))));
  CHECK(rate_vector(rnd, silent)[0] == 0.0);

  const BeamformerSet wrong(2, CVector::Zero(4));
  CHECK_THROWS_AS(rate_vector(rnd, wrong), DimensionMismatchError);
}

TEST_CASE("channel validation") {
  InterferenceChannel ch = orthogonal_pair();
  ch.h(1, 1) = CVector::Zero(2);
  CHECK_THROWS_AS(ch.validate(), ZeroDirectChannelError);
  CHECK_THROWS_AS(nash_beamformers(ch), ZeroDirectChannelError);
  InterferenceChannel bad = orthogonal_pair();
  bad.sigma2 = 0.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("Nash beamformers are unit-norm matched filters") {
  InterferenceChannel ch = orthogonal_pair();
  const BeamformerSet w = nash_beamformers(ch);
  CHECK(std::abs(w[0][0] - 1.0) < 1e-15);
  CHECK(std::abs(w[0][1]) < 1e-15);
  Rng rng(9);
  const InterferenceChannel rnd = InterferenceChannel::random(4, 4, rng);
  for (const auto& v : nash_beamformers(rnd)) CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("no unilateral deviation improves on the Nash rates") {
  Rng rng(10);
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t M = 2 + inst % 3;
    const InterferenceChannel ch = InterferenceChannel::random(M, 4, rng);
    const BeamformerSet ne = nash_beamformers(ch);
    const RateVector base = rate_vector(ch, ne);
    for (std::size_t m = 0; m < M; ++m) {
      for (int d = 0; d < 200; ++d) {
        BeamformerSet dev = ne;
        dev[m] = random_unit(4, rng);
        CHECK(rate_vector(ch, dev)[m] <= base[m] + 1e-12);
      }
    }
  }
}

TEST_CASE("maximum rates") {
  InterferenceChannel ch(1, 2, 1.0);
  ch.h(0, 0) = vec({0.6, std::complex<double>(0.0, 0.8)});
  CHECK(max_rates(ch)[0] == doctest::Approx(1.0));
  ch.sigma2 = 1e12;
  CHECK(max_rates(ch)[0] < 1e-11);
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    const InterferenceChannel r = InterferenceChannel::random(3, 4, rng);
    const RateVector mx = max_rates(r), ne = rate_vector(r, nash_beamformers(r));
    for (std::size_t m = 0; m < 3; ++m) CHECK(mx[m] >= ne[m]);
  }
}

TEST_CASE("parametrised beamformer endpoints") {
  Rng rng(13);
  const InterferenceChannel ch = InterferenceChannel::random(2, 4, rng);
  const BeamformerSet ne = nash_beamformers(ch);
  for (std::size_t m = 0; m < 2; ++m) {
    const auto one = pareto_parametrized_beamformer(m, 1.0, ch);
    CHECK((one.w - ne[m]).norm() < 1e-12);
    const auto zero = pareto_parametrized_beamformer(m, 0.0, ch);
    CHECK(std::norm(tdot(zero.w, ch.h(m, 1 - m))) < 1e-20);
    CHECK(zero.w.norm() == doctest::Approx(1.0));
    CHECK_FALSE(zero.degenerate);
  }
  InterferenceChannel par = orthogonal_pair();
  par.h(0, 1) = vec({2.0, 0.0});
  CHECK(pareto_parametrized_beamformer(0, 0.3, par).degenerate);
  CHECK_THROWS(pareto_parametrized_beamformer(0, 1.5, ch));
}

TEST_CASE("parametrised rate set dominates the Nash point") {
  Rng rng(14);
  for (int inst = 0; inst < 10; ++inst) {
    const InterferenceChannel ch = InterferenceChannel::random(2, 4, rng);
    const RateVector ne = rate_vector(ch, nash_beamformers(ch));
    const RateVector mx = max_rates(ch);
    const auto scan = oracle::pareto_grid(ch, 200, ne, mx, ne, false);
    CHECK(scan.best_dominance >= 0.0);
  }
}

TEST_CASE("feasibility test endpoints") {
  Rng rng(15);
  const InterferenceChannel ch = InterferenceChannel::random(2, 4, rng);
  CHECK(ksbs_feasible(0.0, ch, KsbsMode::kRawFraction).feasible);
  CHECK_FALSE(ksbs_feasible(1.0, ch, KsbsMode::kRawFraction).feasible);
  CHECK_FALSE(ksbs_feasible(1.0, ch).feasible);
  // Interference-free channel reaches the full box but never exceeds it.
  InterferenceChannel free = orthogonal_pair();
  CHECK_FALSE(ksbs_feasible(1.0, free, KsbsMode::kRawFraction).feasible);
  CHECK(ksbs_feasible(0.999, free, KsbsMode::kRawFraction).feasible);
  CHECK_THROWS(ksbs_feasible(1.5, ch));
}

TEST_CASE("feasibility boundary matches a fine lambda grid") {
  Rng rng(16);
  for (KsbsMode mode : {KsbsMode::kNormalizedGain, KsbsMode::kRawFraction}) {
    for (int inst = 0; inst < 5; ++inst) {
      const InterferenceChannel ch = InterferenceChannel::random(2, 4, rng);
      const FeasibilityOracle fo(ch, mode);
      const auto scan = oracle::pareto_grid(ch, 1000, fo.ne_rates(), fo.max_rates(), {}, mode == KsbsMode::kRawFraction);
      CHECK(std::abs(fo.best_fraction() - scan.best_min_fraction) < 2e-3);
      CHECK(fo.best_fraction() >= scan.best_min_fraction - 1e-9);
    }
  }
}

TEST_CASE("bisection outcome properties") {
  Rng rng(17);
  const double delta = 1e-3;
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t M = 2 + inst % 3;
    const InterferenceChannel ch = InterferenceChannel::random(M, 4, rng);
    const BargainingOutcome out = ksbs_bisection(ch, delta);
    CHECK(out.iterations <= static_cast<int>(std::ceil(std::log2(1.0 / delta))));
    for (std::size_t m = 0; m < M; ++m) {
      CHECK(out.ksbs_rates[m] >= out.ne_rates[m] - 1e-12);
      CHECK(out.ksbs_rates[m] <= out.max_rates[m] + 1e-12);
      CHECK(out.beamformers[m].squaredNorm() <= 1.0 + 1e-12);
    }
    // Achieved by the witness beamformers.
    const RateVector achieved = rate_vector(ch, out.beamformers);
    for (std::size_t m = 0; m < M; ++m) CHECK(achieved[m] >= out.ksbs_rates[m] - 1e-9);
    // Monotone classification.
    for (const auto& a : out.steps)
      for (const auto& b : out.steps)
        if (a.feasible && !b.feasible) CHECK(a.r < b.r);
  }
}

TEST_CASE("interference-free channel bargains to the maximum rates") {
  Rng rng(18);
  InterferenceChannel ch = InterferenceChannel::random(3, 4, rng);
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t m = 0; m < 3; ++m)
      if (l != m) ch.h(l, m).setZero();
  const double delta = 1e-3;
  const BargainingOutcome out = ksbs_bisection(ch, delta);
  CHECK(out.fraction >= 1.0 - delta);
  for (std::size_t m = 0; m < 3; ++m) CHECK(std::abs(out.ksbs_rates[m] - out.max_rates[m]) <= delta * out.max_rates[m]);
}

TEST_CASE("symmetric two-player channel bargains to equal rates") {
  InterferenceChannel ch(2, 2, 1.0);
  ch.h(0, 0) = vec({1.0, std::complex<double>(0.0, 0.5)});
  ch.h(1, 1) = vec({1.0, std::complex<double>(0.0, 0.5)});
  ch.h(0, 1) = vec({0.4, 0.7});
  ch.h(1, 0) = vec({0.4, 0.7});
  const BargainingOutcome out = ksbs_bisection(ch, 1e-3);
  CHECK(std::abs(out.ksbs_rates[0] - out.ksbs_rates[1]) < 1e-6);
}

TEST_CASE("power needed for a target rate") {
  // beta / W = 1 bit/s/Hz needs SINR 1.
  CHECK(min_power_for_rate(1e6, 1e6, 1e9, 1e-13, 0.0) == doctest::Approx(1e-4));
  CHECK(min_power_for_rate(0.0, 1e6, 1e9, 1e-13, 0.0) == 0.0);
  CHECK(min_power_for_rate(2e6, 1e6, 10.0, 1.0, 1.0) == doctest::Approx(60.0));
}
