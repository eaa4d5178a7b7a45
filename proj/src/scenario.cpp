#include "dbs/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <thread>

#include "dbs/error.hpp"
#include "dbs/units.hpp"

namespace dbs::scenario {

using beamforming::CVector;
using placement::Deployment;
using placement::PlacementSolution;

void AreaConfig::validate() const {
  if (!(lx_m > 0.0) || !(ly_m > 0.0)) throw DomainError("area: side lengths must be positive");
}

void DistributionSpec::validate() const {
  if (kind == Kind::kTruncatedGaussian && (!(sigma_x_m > 0.0) || !(sigma_y_m > 0.0))) {
    throw DomainError("distribution: truncated Gaussian needs positive sigma");
  }
}

void RadioConfig::validate() const {
  if (!(bandwidth_hz > 0.0)) throw DomainError("radio: bandwidth must be positive");
  if (!std::isfinite(noise_dbm)) throw DomainError("radio: noise must be finite");
  if (!(beta_bps >= 0.0)) throw DomainError("radio: beta must be >= 0");
  if (num_antennas == 0) throw DomainError("radio: need at least one antenna");
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double truncated_axis(double mu, double sigma, double lo, double hi, Rng& rng) {
  std::normal_distribution<double> gauss(mu, sigma);
  for (;;) {
    const double v = gauss(rng);
    if (v >= lo && v <= hi) return v;
  }
}

void check_acceptance(double mu, double sigma, double lo, double hi) {
  const double p = normal_cdf((hi - mu) / sigma) - normal_cdf((lo - mu) / sigma);
  if (!(p >= 1e-6)) throw RejectionStallError("sample_users: truncated Gaussian acceptance below 1e-6");
}

}  // namespace

std::vector<GroundUser> sample_users(std::size_t K, const AreaConfig& area, const DistributionSpec& dist,
                                     std::uint64_t seed) {
  if (K == 0) throw DomainError("sample_users: need at least one user");
  area.validate();
  dist.validate();
  Rng rng(seed);
  std::vector<GroundUser> users;
  users.reserve(K);
  if (dist.kind == DistributionSpec::Kind::kUniform) {
    std::uniform_real_distribution<double> ux(area.x_min(), area.x_max());
    std::uniform_real_distribution<double> uy(area.y_min(), area.y_max());
    for (std::size_t k = 0; k < K; ++k) {
      const double x = ux(rng);
      const double y = uy(rng);
      users.push_back({static_cast<int>(k), x, y});
    }
  } else {
    check_acceptance(dist.mu_x_m, dist.sigma_x_m, area.x_min(), area.x_max());
    check_acceptance(dist.mu_y_m, dist.sigma_y_m, area.y_min(), area.y_max());
    for (std::size_t k = 0; k < K; ++k) {
      const double x = truncated_axis(dist.mu_x_m, dist.sigma_x_m, area.x_min(), area.x_max(), rng);
      const double y = truncated_axis(dist.mu_y_m, dist.sigma_y_m, area.y_min(), area.y_max(), rng);
      users.push_back({static_cast<int>(k), x, y});
    }
  }
  return users;
}

// ---------------------------------------------------------------------------
// Rates

namespace {

struct LinkBudget {
  std::size_t D = 0;
  std::vector<double> rx_w;        // rx_w[i * K + k]: average received power, W
  std::vector<double> pathloss_lin;

  double rx(std::size_t i, std::size_t k, std::size_t K) const { return rx_w[i * K + k]; }
};

LinkBudget link_budget(std::span<const GroundUser> users, std::span<const Deployment> deps,
                       const channel::Environment& env) {
  LinkBudget lb;
  lb.D = deps.size();
  const std::size_t K = users.size();
  lb.rx_w.resize(lb.D * K);
  lb.pathloss_lin.resize(lb.D * K);
  for (std::size_t i = 0; i < lb.D; ++i) {
    for (std::size_t k = 0; k < K; ++k) {
      const double r = placement::distance(deps[i].ground(), users[k].position());
      const double gamma_db = channel::mean_pathloss_db(channel::LinkGeometry(deps[i].h, r), env);
      lb.pathloss_lin[i * K + k] = units::db_to_linear(gamma_db);
      lb.rx_w[i * K + k] = units::dbm_to_watts(deps[i].pt_dbm - gamma_db);
    }
  }
  return lb;
}

// Small-scale fading vector for the link drone -> user, fixed per seed.
CVector fading(std::uint64_t seed, int drone_id, int user_id, std::size_t antennas) {
  Rng rng = make_rng(seed, "fading", (static_cast<std::uint64_t>(drone_id) << 32) | static_cast<std::uint32_t>(user_id));
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  CVector g(static_cast<Eigen::Index>(antennas));
  for (Eigen::Index a = 0; a < g.size(); ++a) g[a] = {gauss(rng), gauss(rng)};
  return g;
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

RateEvaluation evaluate_rates(std::span<const GroundUser> users, const PlacementSolution& solution,
                              const channel::Environment& env, const RadioConfig& radio,
                              const BargainingConfig& bargaining, std::uint64_t seed) {
  radio.validate();
  const auto& deps = solution.deployments;
  const std::size_t K = users.size();
  const std::size_t D = deps.size();
  if (D == 0) throw DomainError("evaluate_rates: no deployments");
  const LinkBudget lb = link_budget(users, deps, env);
  const double noise_w = units::dbm_to_watts(radio.noise_dbm);

  RateEvaluation ev;
  ev.per_user_rate_bps.assign(K, 0.0);
  ev.serving_drone.assign(K, -1);
  ev.rate_satisfied.assign(K, false);
  ev.required_power_w.assign(K, 0.0);

  std::vector<std::size_t> serving(K, 0);
  std::vector<std::vector<std::size_t>> covering(K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < D; ++i) {
      if (lb.rx(i, k, K) > lb.rx(serving[k], k, K)) serving[k] = i;
      if (placement::distance(deps[i].ground(), users[k].position()) <= deps[i].R + 1e-6) covering[k].push_back(i);
    }
    ev.serving_drone[k] = deps[serving[k]].drone_id;
  }

  // Interfering groups: connected components of the disk-overlap graph.
  DisjointSet ds(D);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t c = 1; c < covering[k].size(); ++c) ds.unite(covering[k][0], covering[k][c]);
  }

  // Per user: beamformed links (drone index -> effective gain) when the user
  // lies in an overlap region served by a bargaining group.
  std::vector<std::vector<std::pair<std::size_t, double>>> beamformed(K);

  std::vector<std::vector<std::size_t>> components(D);
  for (std::size_t i = 0; i < D; ++i) components[ds.find(i)].push_back(i);
  for (const auto& comp : components) {
    if (comp.size() < 2) continue;
    // Players: drones in the component serving at least one overlap user;
    // each bargains on behalf of its weakest such user.
    std::vector<std::size_t> players, reps;
    for (std::size_t i : comp) {
      std::optional<std::size_t> rep;
      for (std::size_t k = 0; k < K; ++k) {
        if (serving[k] != i || covering[k].size() < 2) continue;
        if (!rep || lb.rx(i, k, K) < lb.rx(i, *rep, K)) rep = k;
      }
      if (rep) {
        players.push_back(i);
        reps.push_back(*rep);
      }
    }
    if (players.size() < 2) continue;

    const std::size_t P = players.size();
    const auto is_player = [&](std::size_t i) { return std::find(players.begin(), players.end(), i) != players.end(); };
    const auto outside_interference = [&](std::size_t k) {
      double s = 0.0;
      for (std::size_t j = 0; j < D; ++j)
        if (!is_player(j)) s += lb.rx(j, k, K);
      return s;
    };

    // Unit noise: each user's column is scaled by its noise-plus-outside-interference.
    beamforming::InterferenceChannel ch(P, radio.num_antennas, 1.0);
    for (std::size_t m = 0; m < P; ++m) {
      const double floor_w = noise_w + outside_interference(reps[m]);
      for (std::size_t l = 0; l < P; ++l) {
        ch.h(l, m) = fading(seed, deps[players[l]].drone_id, users[reps[m]].id, radio.num_antennas) *
                     std::sqrt(lb.rx(players[l], reps[m], K) / floor_w);
      }
    }
    BargainingGroup group;
    group.outcome = beamforming::ksbs_bisection(ch, bargaining.delta, bargaining.mode);
    for (std::size_t m = 0; m < P; ++m) {
      group.drone_ids.push_back(deps[players[m]].drone_id);
      group.representative_users.push_back(users[reps[m]].id);
    }

    // Every overlap user served by a player sees the bargained beams.
    for (std::size_t k = 0; k < K; ++k) {
      if (covering[k].size() < 2 || !is_player(serving[k])) continue;
      for (std::size_t l = 0; l < P; ++l) {
        const CVector g = fading(seed, deps[players[l]].drone_id, users[k].id, radio.num_antennas);
        const double gain = std::norm((group.outcome.beamformers[l].array() * g.array()).sum());
        beamformed[k].emplace_back(players[l], gain * lb.rx(players[l], k, K));
      }
    }
    ev.groups.push_back(std::move(group));
  }

  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t s = serving[k];
    double signal = lb.rx(s, k, K);
    double interference = 0.0;
    for (std::size_t j = 0; j < D; ++j)
      if (j != s) interference += lb.rx(j, k, K);
    if (!beamformed[k].empty()) {
      interference = 0.0;
      for (std::size_t j = 0; j < D; ++j) {
        const auto it = std::find_if(beamformed[k].begin(), beamformed[k].end(),
                                     [j](const auto& p) { return p.first == j; });
        const double power = it == beamformed[k].end() ? lb.rx(j, k, K) : it->second;
        if (j == s) {
          signal = power;
        } else {
          interference += power;
        }
      }
    }
    const double rate = radio.bandwidth_hz * std::log2(1.0 + signal / (noise_w + interference));
    ev.per_user_rate_bps[k] = rate;
    ev.rate_satisfied[k] = rate >= radio.beta_bps;
    if (!ev.rate_satisfied[k]) ++ev.unmet_users;
    ev.required_power_w[k] = beamforming::min_power_for_rate(radio.beta_bps, radio.bandwidth_hz,
                                                             lb.pathloss_lin[s * K + k], noise_w, interference);
    total += rate;
  }
  ev.avg_rate_bps = total / static_cast<double>(K);
  return ev;
}

// ---------------------------------------------------------------------------
// Outer loop

std::uint64_t fading_seed(std::uint64_t seed) { return derive_seed(seed, "fading"); }

ExperimentReport run_pipeline(std::span<const GroundUser> users, const placement::DroneRepository& repo,
                              const channel::Environment& env, const RadioConfig& radio,
                              const PipelineOptions& opts, std::uint64_t seed) {
  placement::PlacementOptions popts = opts.placement;
  popts.seed = derive_seed(seed, "placement");
  placement::PlacementResult placed = placement::solve_placement(users, repo, env, popts);
  const std::uint64_t rate_seed = fading_seed(seed);

  ExperimentReport report;
  std::optional<std::size_t> best;
  std::vector<RateEvaluation> evals;
  if (popts.prune_by_power) {
    RateEvaluation first = evaluate_rates(users, placed.best, env, radio, opts.bargaining, rate_seed);
    if (first.unmet_users > 0) {
      // Falling back to costlier candidates needs the unpruned list.
      popts.prune_by_power = false;
      placed = placement::solve_placement(users, repo, env, popts);
    } else {
      placed.candidates.resize(1);
      evals.push_back(std::move(first));
      best = 0;
      report.convergence_trace.push_back({1, placed.best.M, 0});
    }
  }
  for (std::size_t c = evals.size(); c < placed.candidates.size() && !best; ++c) {
    evals.push_back(evaluate_rates(users, placed.candidates[c], env, radio, opts.bargaining, rate_seed));
    report.convergence_trace.push_back({static_cast<int>(c + 1), placed.candidates[c].M, evals.back().unmet_users});
    if (evals.back().unmet_users == 0) {
      best = c;
      break;
    }
  }
  if (!best) {
    best = 0;
    for (std::size_t c = 1; c < evals.size(); ++c)
      if (evals[c].unmet_users < evals[*best].unmet_users) best = c;
  }
  report.solution = placed.candidates[*best];
  report.rates = std::move(evals[*best]);
  report.aggregate_power_w = report.solution.aggregate_power_w;
  report.avg_rate_bps = report.rates.avg_rate_bps;
  report.num_deployed = report.solution.M;
  report.all_rates_met = report.rates.unmet_users == 0;
  return report;
}

// ---------------------------------------------------------------------------
// Baseline

std::pair<std::size_t, std::size_t> baseline_grid(std::size_t M) {
  if (M == 0) throw DomainError("baseline_grid: M must be >= 1");
  std::size_t rows = 1;
  for (std::size_t r = 1; r * r <= M; ++r) {
    if (M % r == 0) rows = r;
  }
  return {rows, M / rows};
}

std::optional<PlacementSolution> voronoi_baseline(std::size_t M, const AreaConfig& area,
                                                  std::span<const GroundUser> users,
                                                  const placement::DroneRepository& repo,
                                                  const channel::Environment& env,
                                                  placement::MatchingStrategy strategy) {
  const auto [rows, cols] = baseline_grid(M);
  const double w = area.lx_m / static_cast<double>(cols);
  const double h = area.ly_m / static_cast<double>(rows);
  std::vector<Point> centers;
  for (std::size_t r = 0; r < rows && centers.size() < M; ++r) {
    for (std::size_t c = 0; c < cols && centers.size() < M; ++c) {
      centers.push_back({area.x_min() + (c + 0.5) * w, area.y_min() + (r + 0.5) * h});
    }
  }
  const std::vector<Point> pts = placement::positions(users);
  const std::vector<std::size_t> owner = placement::assign_to_nearest(pts, centers);
  std::vector<placement::Disk> disks;
  for (const Point& c : centers) disks.push_back({c, 0.0});
  for (std::size_t k = 0; k < pts.size(); ++k) {
    disks[owner[k]].radius = std::max(disks[owner[k]].radius, placement::distance(centers[owner[k]], pts[k]));
  }
  return placement::build_solution(disks, owner, repo, altitude::AltitudeSolver(env), strategy);
}

// ---------------------------------------------------------------------------
// Sweeps

std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) {
  return trial == 0 ? master : derive_seed(master, "trial", trial);
}

std::vector<GroundUser> scenario_users(const ScenarioConfig& cfg, std::uint64_t seed) {
  return sample_users(cfg.num_users, cfg.area, cfg.distribution, derive_seed(seed, "users"));
}

ExperimentReport run_scenario(const ScenarioConfig& cfg, std::span<const GroundUser> users, std::uint64_t seed) {
  return run_pipeline(users, cfg.repo, cfg.env, cfg.radio, cfg.options, seed);
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& base, SweepVariable vary, double value) {
  ScenarioConfig cfg = base;
  if (vary == SweepVariable::kUsers) {
    if (!(value >= 1.0) || value != std::floor(value)) throw DomainError("sweep: user counts must be positive integers");
    cfg.num_users = static_cast<std::size_t>(value);
  } else {
    if (!(value > 0.0)) throw DomainError("sweep: density must be positive");
    const double sigma_m = 1000.0 * std::sqrt(static_cast<double>(cfg.num_users) / (2.0 * units::kPi * value));
    cfg.distribution.kind = DistributionSpec::Kind::kTruncatedGaussian;
    cfg.distribution.sigma_x_m = sigma_m;
    cfg.distribution.sigma_y_m = sigma_m;
  }
  return cfg;
}

unsigned worker_threads(unsigned requested) {
  if (requested > 0) return requested;
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DBS_PLANNER_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
    }
  }
  return n;
}

namespace {

struct TrialOutcome {
  bool feasible = false;
  double power_w = 0.0;
  double avg_rate_bps = 0.0;
  double M = 0.0;
  bool voronoi_feasible = false;
  double voronoi_power_w = 0.0;
};

}  // namespace

std::vector<SweepRow> sweep(const ScenarioConfig& base, const SweepSpec& spec) {
  if (spec.values.empty()) throw DomainError("sweep: no values");
  if (spec.trials == 0) throw DomainError("sweep: trials must be >= 1");
  std::vector<ScenarioConfig> configs;
  for (double v : spec.values) configs.push_back(apply_sweep_value(base, spec.vary, v));

  const std::size_t tasks = configs.size() * spec.trials;
  std::vector<TrialOutcome> outcomes(tasks);
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const ScenarioConfig& cfg = configs[t / spec.trials];
      const std::uint64_t seed = trial_seed(cfg.seed, t % spec.trials);
      const std::vector<GroundUser> users = scenario_users(cfg, seed);
      TrialOutcome& out = outcomes[t];
      try {
        const ExperimentReport rep = run_scenario(cfg, users, seed);
        out.feasible = true;
        out.power_w = rep.aggregate_power_w;
        out.avg_rate_bps = rep.avg_rate_bps;
        out.M = static_cast<double>(rep.num_deployed);
        if (spec.voronoi_baseline) {
          const auto base_sol = voronoi_baseline(rep.num_deployed, cfg.area, users, cfg.repo, cfg.env,
                                                 cfg.options.placement.matching);
          out.voronoi_feasible = base_sol.has_value();
          if (base_sol) out.voronoi_power_w = base_sol->aggregate_power_w;
        }
      } catch (const NoFeasibleSolutionError&) {
        out.feasible = false;
      }
    }
  };
  const unsigned n = std::min<unsigned>(worker_threads(spec.threads), static_cast<unsigned>(tasks));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<SweepRow> rows;
  for (std::size_t v = 0; v < configs.size(); ++v) {
    SweepRow row;
    row.value = spec.values[v];
    std::size_t voronoi_ok = 0;
    for (std::size_t t = 0; t < spec.trials; ++t) {
      const TrialOutcome& o = outcomes[v * spec.trials + t];
      if (!o.feasible) {
        ++row.failures;
        continue;
      }
      ++row.trials;
      row.mean_power_w += o.power_w;
      row.mean_rate_bps += o.avg_rate_bps;
      row.mean_M += o.M;
      if (spec.voronoi_baseline) {
        if (o.voronoi_feasible) {
          ++voronoi_ok;
          row.mean_voronoi_power_w += o.voronoi_power_w;
        } else {
          ++row.voronoi_infeasible;
        }
      }
    }
    if (row.trials > 0) {
      const double n_ok = static_cast<double>(row.trials);
      row.mean_power_w /= n_ok;
      row.mean_rate_bps /= n_ok;
      row.mean_M /= n_ok;
    }
    if (voronoi_ok > 0) row.mean_voronoi_power_w /= static_cast<double>(voronoi_ok);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dbs::scenario
