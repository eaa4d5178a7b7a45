// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dbs/altitude.hpp"
#include "dbs/beamforming.hpp"
#include "dbs/channel.hpp"
#include "dbs/cli.hpp"
#include "dbs/error.hpp"
#include "dbs/geometry.hpp"
#include "dbs/placement.hpp"
#include "dbs/scenario.hpp"
#include "oracles.hpp"

using namespace dbs;
using placement::Point;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

placement::DroneRepository table_repo() {
  const std::vector<placement::DroneType> types = {{-INFINITY, 35.0, 4}, {-INFINITY, 39.0, 4}, {-INFINITY, 43.0, 4}};
  return placement::make_repository(types);
}

std::vector<Point> uniform_points(std::size_t n, double side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, side);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

beamforming::CVector random_unit(std::size_t K, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  beamforming::CVector w(static_cast<Eigen::Index>(K));
  for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = {g(rng), g(rng)};
  return w / w.norm();
}

// Number of adjacent decreases beyond a relative slack of 1e-12.
int inversions(const std::vector<double>& v) {
  int n = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1] * (1.0 - 1e-12)) ++n;
  return n;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + fmt("%.4g", x);
  return s;
}

Verdict channel_identity() {
  const auto env = channel::urban();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> h(0.1, 3000.0), r(0.0, 10000.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const channel::LinkGeometry g(h(rng), r(rng));
    worst = std::max(worst, std::abs(channel::mean_pathloss_db(g, env) - channel::mean_pathloss_db_closed_form(g, env)));
  }
  return {worst < 1e-9, fmt("max |difference| %.3g dB over 10^4 geometries", worst)};
}

Verdict altitude_optimum() {
  const auto env = channel::urban();
  const altitude::AltitudeSolver solver(env);
  double worst = 0.0;
  std::vector<double> thetas;
  for (double R : {500.0, 2000.0, 5000.0}) {
    const double theta = solver.radius_to_power(R).theta_opt;
    thetas.push_back(theta);
    worst = std::max(worst, std::abs(theta - oracle::theta_grid_argmin(R, env, 1000000)));
  }
  const bool same = thetas[0] == thetas[1] && thetas[1] == thetas[2];
  return {worst < 1e-4 && same,
          fmt("theta* = %.6f rad, max |theta* - grid argmin| %.3g rad, identical across R: %s", thetas[0], worst,
              same ? "yes" : "no")};
}

Verdict unimodality() {
  const auto env = channel::urban();
  std::string detail;
  bool ok = true;
  for (double r : {1000.0, 3000.0}) {
    int changes = 0;
    double prev_d = 0.0;
    double prev = channel::mean_pathloss_db(channel::LinkGeometry(0.1, r), env);
    for (int i = 2; i <= 100000; ++i) {
      const double g = channel::mean_pathloss_db(channel::LinkGeometry(0.1 * i, r), env);
      const double d = g - prev;
      if (d != 0.0) {
        if (prev_d != 0.0 && (d > 0.0) != (prev_d > 0.0)) ++changes;
        prev_d = d;
      }
      prev = g;
    }
    ok = ok && changes == 1;
    detail += fmt("%sr = %g m: %d sign change(s)", detail.empty() ? "" : ", ", r, changes);
  }
  return {ok, detail + " over h in (0, 10 km] at 0.1 m spacing"};
}

Verdict enclosing_disk() {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> count(1, 40);
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const auto pts = uniform_points(count(rng), 1000.0, rng);
    worst = std::max(worst, 
                                     std::abs(placement::min_enclosing_disk(pts).radius - oracle::enclosing_disk_enumeration(pts).radius));
  }
  return {worst < 1e-9, fmt("max |radius difference| %.3g m over 200 instances", worst)};
}

Verdict kcenter_quality() {
  std::mt19937_64 rng(5);
  Rng lloyd_rng(55);
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const auto pts = uniform_points(8, 1000.0, rng);
    const double heuristic = placement::kcenter_multistart(pts, 2, placement::KCenterOptions{}, lloyd_rng).max_radius();
    worst = std::max(worst, heuristic / oracle::two_center_exact(pts) - 1.0);
  }
  return {worst <= 0.05, fmt("worst excess over exact 2-center %.3g%% across 50 instances", 100.0 * worst)};
}

Verdict nash_equilibrium() {
  using namespace beamforming;
  Rng rng(6);
  double worst = -INFINITY;
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t M = 2 + inst % 3;
    const InterferenceChannel ch = InterferenceChannel::random(M, 4, rng);
    const BeamformerSet ne = nash_beamformers(ch);
    const RateVector base = rate_vector(ch, ne);
    for (std::size_t m = 0; m < M; ++m) {
      for (int d = 0; d < 1000; ++d) {
        BeamformerSet dev = ne;
        dev[m] = random_unit(4, rng);
        worst = std::max(worst, rate_vector(ch, dev)[m] - base[m]);
      }
    }
  }
  return {worst <= 1e-12, fmt("largest deviation gain %.3g bits/s/Hz", worst)};
}

Verdict ksbs_correctness() {
  using namespace beamforming;
  const double delta = 1e-3;
  const int bound = static_cast<int>(std::ceil(std::log2(1.0 / delta)));
  Rng rng(7);
  int max_iters = 0;
  double worst_collinear = 0.0, worst_witness = 0.0, worst_dominance = -INFINITY, worst_ne = INFINITY;
  for (int inst = 0; inst < 100; ++inst) {
    const InterferenceChannel ch = InterferenceChannel::random(2, 4, rng);
    const BargainingOutcome out = ksbs_bisection(ch, delta);
    max_iters = std::max(max_iters, out.iterations);
    const auto& d = out.ne_rates;
    const auto& mx = out.max_rates;
    const auto& r = out.ksbs_rates;
    const double f1 = (r[0] - d[0]) / (mx[0] - d[0]), f2 = (r[1] - d[1]) / (mx[1] - d[1]);
    worst_collinear = std::max(worst_collinear, std::abs(f1 - f2));
    const RateVector achieved = rate_vector(ch, out.beamformers);
    for (std::size_t m = 0; m < 2; ++m) {
      worst_witness = std::max(worst_witness, r[m] - achieved[m]);
      worst_ne = std::min(worst_ne, r[m] - d[m]);
    }
    worst_dominance = std::max(worst_dominance, oracle::pareto_grid(ch, 1000, d, mx, r, false).best_dominance);
  }
  const bool a = max_iters <= bound;
  const bool b = worst_collinear <= 1e-6 && worst_witness <= 1e-6;
  const bool c = worst_dominance <= 2e-3;
  const bool dd = worst_ne >= -1e-12;
  return {a && b && c && dd,
          fmt("(a) %s max iterations %d <= %d; (b) %s collinearity gap %.3g, witness shortfall %.3g; "
              "(c) %s max grid dominance %.3g; (d) %s min KSBS - NE %.3g",
              a ? "ok" : "FAIL", max_iters, bound, b ? "ok" : "FAIL", worst_collinear, worst_witness,
              c ? "ok" : "FAIL", worst_dominance, dd ? "ok" : "FAIL", worst_ne)};
}

Verdict homogeneous_counts() {
  std::vector<double> mean_m;
  std::size_t failures = 0;
  for (double p : {43.0, 39.0, 35.0}) {
    scenario::ScenarioConfig cfg;
    cfg.repo = placement::make_repository(std::vector<placement::DroneType>{{-INFINITY, p, 140}});
    cfg.num_users = 140;
    cfg.seed = 8;
    scenario::SweepSpec spec;
    spec.values = {140.0};
    spec.trials = 20;
    const auto row = scenario::sweep(cfg, spec).at(0);
    failures += row.failures;
    mean_m.push_back(row.mean_M);
  }
  const bool ordered = failures == 0 && mean_m[0] <= mean_m[1] && mean_m[1] <= mean_m[2];
  const double ref[3] = {5.0, 6.0, 7.0};
  const bool exact = mean_m[0] == ref[0] && mean_m[1] == ref[1] && mean_m[2] == ref[2];
  return {ordered, fmt("mean M (43, 39, 35 dBm) = %s; reference 5, 6, 7 %s (deviation %+.4g, %+.4g, %+.4g); "
                       "%zu infeasible trials",
                       join(mean_m).c_str(), exact ? "matched" : "not matched", mean_m[0] - ref[0],
                       mean_m[1] - ref[1], mean_m[2] - ref[2], failures)};
}

struct Trend {
  std::vector<double> power, m;
  std::size_t failures = 0;
};

Trend trend_over_users(const placement::DroneRepository& repo, double side_m) {
  scenario::ScenarioConfig cfg;
  cfg.repo = repo;
  cfg.area = scenario::AreaConfig{side_m, side_m};
  cfg.seed = 9;
  scenario::SweepSpec spec;
  spec.values = {10.0, 50.0, 100.0, 150.0};
  spec.trials = 20;
  Trend t;
  for (const auto& row : scenario::sweep(cfg, spec)) {
    t.power.push_back(row.mean_power_w);
    t.m.push_back(row.mean_M);
    t.failures += row.failures;
  }
  return t;
}

// Pass condition: 10 km square with the three power classes, 50 drones each so
// that every draw is coverable. The 12-drone fleet on a 2 km square, where the
// drone count binds, is reported alongside.
Verdict growth_trends() {
  const std::vector<placement::DroneType> wide = {{-INFINITY, 35.0, 50}, {-INFINITY, 39.0, 50}, {-INFINITY, 43.0, 50}};
  const Trend full = trend_over_users(placement::make_repository(wide), 10000.0);
  const Trend bound = trend_over_users(table_repo(), 2000.0);
  const int ip = inversions(full.power), im = inversions(full.m);
  return {full.failures == 0 && ip <= 1 && im <= 1,
          fmt("K = 10, 50, 100, 150, 10 km square, 150-drone fleet: mean power W = %s (%d inversion(s)); "
              "mean M = %s (%d inversion(s)); %zu infeasible trials. Informational, 12-drone fleet on 2 km square: "
              "mean power W = %s (%d inversion(s)); mean M = %s (%d inversion(s))",
              join(full.power).c_str(), ip, join(full.m).c_str(), im, full.failures, join(bound.power).c_str(),
              inversions(bound.power), join(bound.m).c_str(), inversions(bound.m))};
}

Verdict baseline_comparison() {
  scenario::ScenarioConfig cfg;
  cfg.repo = table_repo();
  cfg.area = scenario::AreaConfig{2000.0, 2000.0};
  cfg.num_users = 30;
  cfg.distribution.kind = scenario::DistributionSpec::Kind::kTruncatedGaussian;
  cfg.distribution.sigma_x_m = cfg.distribution.sigma_y_m = 500.0;
  int wins = 0, baseline_infeasible = 0, instances = 0;
  double sum_opt = 0.0, sum_base = 0.0;
  int both = 0;
  for (std::size_t t = 0; t < 100; ++t) {
    const std::uint64_t seed = scenario::trial_seed(10, t);
    const auto users = scenario::scenario_users(cfg, seed);
    scenario::ExperimentReport rep;
    try {
      rep = scenario::run_scenario(cfg, users, seed);
    } catch (const NoFeasibleSolutionError&) {
      continue;
    }
    ++instances;
    const auto base = scenario::voronoi_baseline(rep.num_deployed, cfg.area, users, cfg.repo, cfg.env);
    if (!base) {
      ++baseline_infeasible;
      ++wins;
      continue;
    }
    ++both;
    sum_opt += rep.aggregate_power_w;
    sum_base += base->aggregate_power_w;
    if (rep.aggregate_power_w <= base->aggregate_power_w) ++wins;
  }
  return {instances == 100 && wins >= 90,
          fmt("optimal <= baseline on %d of %d instances (%d with an infeasible baseline); mean power where both "
              "feasible %.4g W vs %.4g W",
              wins, instances, baseline_infeasible, sum_opt / std::max(both, 1), sum_base / std::max(both, 1))};
}

Verdict sweep_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dbs_acceptance_sweep";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream(dir / "cfg.json") << R"({"area": {"lx_m": 3000, "ly_m": 3000}, "seed": 11})";
  }
  const auto run_once = [&](const char* threads, const fs::path& out) {
    setenv("DBS_PLANNER_THREADS", threads, 1);
    cli::SweepArgs args;
    args.config = dir / "cfg.json";
    args.values = "10,30";
    args.trials = 3;
    args.baseline = "voronoi";
    args.out = out;
    std::ostringstream sink;
    return cli::cmd_sweep(args, sink, sink);
  };
  const int c1 = run_once("1", dir / "a.csv");
  const int c2 = run_once("4", dir / "b.csv");
  unsetenv("DBS_PLANNER_THREADS");
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const std::string a = slurp(dir / "a.csv"), b = slurp(dir / "b.csv");
  const bool same = c1 == 0 && c2 == 0 && !a.empty() && a == b;
  return {same, fmt("exit codes %d, %d; %zu-byte CSVs %s (1 vs 4 worker threads)", c1, c2, a.size(),
                    a == b ? "identical" : "differ")};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Verdict()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "pathloss forms agree", 1.0, channel_identity},
      {2, "optimal elevation angle", 10.0, altitude_optimum},
      {3, "pathloss unimodal in altitude", 1.0, unimodality},
      {4, "minimum enclosing disk exact", 30.0, enclosing_disk},
      {5, "two-center heuristic within 5%", 60.0, kcenter_quality},
      {6, "Nash equilibrium stable", 60.0, nash_equilibrium},
      {7, "two-player bargaining solution", 300.0, ksbs_correctness},
      {8, "homogeneous fleet size ordering", 600.0, homogeneous_counts},
      {9, "power and fleet size grow with users", 600.0, growth_trends},
      {10, "optimal beats grid baseline", 600.0, baseline_comparison},
      {11, "sweep output deterministic", 120.0, sweep_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = v.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s [%2d] %s: %s; %.2f s (limit %g s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                secs, c.limit_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
