#include "dbs/placement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "dbs/error.hpp"
#include "dbs/units.hpp"

namespace dbs::placement {
namespace {

constexpr double kFreezeTolerance = 1e-9;

std::vector<Point> subset(std::span<const Point> pts, std::span<const std::size_t> idx) {
  std::vector<Point> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(pts[i]);
  return out;
}

// Distinct points in lexicographic order together with, for each input
// point, the index of its distinct representative.
std::vector<Point> distinct_points(std::span<const Point> pts, std::vector<std::size_t>* rep = nullptr) {
  std::vector<Point> uniq(pts.begin(), pts.end());
  const auto less = [](const Point& p, const Point& q) { return std::tie(p.x, p.y) < std::tie(q.x, q.y); };
  std::sort(uniq.begin(), uniq.end(), less);
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (rep != nullptr) {
    rep->resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      (*rep)[i] = static_cast<std::size_t>(std::lower_bound(uniq.begin(), uniq.end(), pts[i], less) - uniq.begin());
    }
  }
  return uniq;
}

bool better(const LloydResult& a, const LloydResult& b) {
  const double am = a.max_radius(), bm = b.max_radius();
  if (am != bm) return am < bm;
  return a.sum_radii() < b.sum_radii();
}

}  // namespace

std::vector<Point> positions(std::span<const GroundUser> users) {
  std::vector<Point> out;
  out.reserve(users.size());
  for (const auto& u : users) out.push_back(u.position());
  return out;
}

DroneRepository make_repository(std::span<const DroneType> types) {
  DroneRepository repo;
  for (std::size_t t = 0; t < types.size(); ++t) {
    for (int c = 0; c < types[t].count; ++c) {
      repo.push_back(DroneSpec{static_cast<int>(t), types[t].p_min_dbm, types[t].p_max_dbm});
    }
  }
  return repo;
}

double aggregate_power_w(std::span<const Deployment> deployments) {
  double total = 0.0;
  for (const auto& d : deployments) total += units::dbm_to_watts(d.pt_dbm);
  return total;
}

std::vector<std::size_t> assign_to_nearest(std::span<const Point> users, std::span<const Point> centers) {
  if (centers.empty()) throw DomainError("assign_to_nearest: no centers");
  std::vector<std::size_t> part(users.size(), 0);
  for (std::size_t j = 0; j < users.size(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const double dx = users[j].x - centers[i].x, dy = users[j].y - centers[i].y;
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) {
        best = d2;
        part[j] = i;
      }
    }
  }
  return part;
}

double LloydResult::max_radius() const {
  return radii.empty() ? 0.0 : *std::max_element(radii.begin(), radii.end());
}

double LloydResult::sum_radii() const { return std::accumulate(radii.begin(), radii.end(), 0.0); }

LloydResult lloyd_kcenter(std::span<const Point> users, std::span<const Point> init_centers, int max_iters) {
  if (users.empty()) throw EmptyInputError("lloyd_kcenter: no users");
  if (init_centers.empty()) throw DomainError("lloyd_kcenter: need at least one center");
  const std::size_t M = init_centers.size();

  LloydResult res;
  res.centers.assign(init_centers.begin(), init_centers.end());
  res.radii.assign(M, 0.0);
  std::vector<std::size_t> part = assign_to_nearest(users, res.centers);

  std::vector<std::vector<Point>> cells(M);
  const auto update = [&](const std::vector<std::size_t>& p) {
    for (auto& c : cells) c.clear();
    for (std::size_t j = 0; j < users.size(); ++j) cells[p[j]].push_back(users[j]);
    for (std::size_t i = 0; i < M; ++i) {
      if (cells[i].empty()) {
        res.radii[i] = 0.0;
        continue;
      }
      const Disk d = min_enclosing_disk(cells[i]);
      res.centers[i] = d.center;
      res.radii[i] = d.radius;
    }
  };

  while (res.iterations < max_iters) {
    update(part);
    ++res.iterations;
    res.max_radius_trace.push_back(res.max_radius());
    std::vector<std::size_t> next = assign_to_nearest(users, res.centers);
    if (next == part) {
      res.converged = true;
      break;
    }
    part = std::move(next);
  }
  if (!res.converged) update(part);  // radii describe the partition we return
  res.partition = std::move(part);
  return res;
}

std::vector<Point> farthest_point_seeds(std::span<const Point> users, std::size_t M, Rng& rng) {
  if (users.empty()) throw EmptyInputError("farthest_point_seeds: no users");
  std::vector<Point> seeds;
  seeds.reserve(M);
  std::uniform_int_distribution<std::size_t> pick(0, users.size() - 1);
  seeds.push_back(users[pick(rng)]);
  std::vector<double> nearest(users.size());
  for (std::size_t j = 0; j < users.size(); ++j) nearest[j] = distance(users[j], seeds[0]);
  while (seeds.size() < M) {
    const auto far = static_cast<std::size_t>(std::max_element(nearest.begin(), nearest.end()) - nearest.begin());
    seeds.push_back(users[far]);
    for (std::size_t j = 0; j < users.size(); ++j) nearest[j] = std::min(nearest[j], distance(users[j], users[far]));
  }
  return seeds;
}

std::vector<Point> random_user_seeds(std::span<const Point> users, std::size_t M, Rng& rng) {
  if (users.empty()) throw EmptyInputError("random_user_seeds: no users");
  std::vector<std::size_t> idx(users.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<Point> seeds;
  seeds.reserve(M);
  for (std::size_t i = 0; i < M; ++i) {
    if (i < idx.size()) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
      seeds.push_back(users[idx[i]]);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
      seeds.push_back(users[pick(rng)]);
    }
  }
  return seeds;
}

LloydResult kcenter_multistart(std::span<const Point> users, std::size_t M, const KCenterOptions& opts, Rng& rng,
                               std::span<const Point> warm_start) {
  if (M == 0) throw DomainError("kcenter_multistart: M must be >= 1");
  LloydResult best = lloyd_kcenter(users, farthest_point_seeds(users, M, rng), opts.max_iters);
  for (int r = 1; r < opts.restarts; ++r) {
    LloydResult run = lloyd_kcenter(users, random_user_seeds(users, M, rng), opts.max_iters);
    if (better(run, best)) best = std::move(run);
  }
  if (warm_start.size() == M) {
    LloydResult run = lloyd_kcenter(users, warm_start, opts.max_iters);
    if (better(run, best)) best = std::move(run);
  }
  return best;
}

std::optional<DiskCover> recursive_radius_minimization(std::span<const Point> users, std::size_t M,
                                                       const KCenterOptions& opts, Rng& rng, double radius_cap,
                                                       const AbandonPredicate& abandon) {
  if (users.empty()) throw EmptyInputError("recursive_radius_minimization: no users");
  if (M == 0) throw DomainError("recursive_radius_minimization: M must be >= 1");

  DiskCover cover;
  constexpr std::size_t kUnowned = std::numeric_limits<std::size_t>::max();
  cover.owner.assign(users.size(), kUnowned);
  std::vector<std::size_t> remaining(users.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  std::vector<Point> warm;

  const auto freeze = [&](const Disk& d, std::span<const std::size_t> members) -> bool {
    if (d.radius > radius_cap) return false;
    const std::size_t id = cover.disks.size();
    cover.disks.push_back(d);
    if (abandon && abandon(cover.disks, M - cover.disks.size())) return false;
    for (std::size_t j : members) cover.owner[j] = id;
    std::vector<std::size_t> rest;
    for (std::size_t j : remaining) {
      if (cover.owner[j] == id) continue;
      if (d.contains(users[j], kFreezeTolerance)) {
        cover.owner[j] = id;
      } else {
        rest.push_back(j);
      }
    }
    remaining = std::move(rest);
    return true;
  };

  for (std::size_t m = M; m >= 1; --m) {
    if (remaining.empty()) {
      // Nothing left to cover: the leftover disks are degenerate.
      const Point at = cover.disks.back().center;
      for (std::size_t k = 0; k < m; ++k) cover.disks.push_back(Disk{at, 0.0});
      break;
    }
    const std::vector<Point> pts = subset(users, remaining);
    std::vector<std::size_t> rep;
    const std::vector<Point> uniq = distinct_points(pts, &rep);
    if (m >= uniq.size()) {
      // One zero-radius disk per distinct location is optimal.
      const std::size_t base = cover.disks.size();
      for (const Point& p : uniq) cover.disks.push_back(Disk{p, 0.0});
      for (std::size_t k = 0; k < pts.size(); ++k) cover.owner[remaining[k]] = base + rep[k];
      for (std::size_t k = uniq.size(); k < m; ++k) cover.disks.push_back(Disk{uniq.back(), 0.0});
      remaining.clear();
      break;
    }
    if (m == 1) {
      if (!freeze(min_enclosing_disk(pts), remaining)) return std::nullopt;
      break;
    }
    const LloydResult res = kcenter_multistart(pts, m, opts, rng, warm);
    const auto largest =
        static_cast<std::size_t>(std::max_element(res.radii.begin(), res.radii.end()) - res.radii.begin());
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (res.partition[k] == largest) members.push_back(remaining[k]);
    }
    if (!freeze(Disk{res.centers[largest], res.radii[largest]}, members)) return std::nullopt;
    warm.clear();
    for (std::size_t i = 0; i < res.centers.size(); ++i) {
      if (i != largest) warm.push_back(res.centers[i]);
    }
  }

  // Sort descending by radius and remap ownership.
  std::vector<std::size_t> order(cover.disks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cover.disks[a].radius > cover.disks[b].radius; });
  std::vector<std::size_t> new_index(order.size());
  std::vector<Disk> sorted;
  sorted.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    new_index[order[k]] = k;
    sorted.push_back(cover.disks[order[k]]);
  }
  cover.disks = std::move(sorted);
  for (auto& o : cover.owner) o = new_index[o];
  return cover;
}

std::optional<std::vector<MatchedDisk>> match_drones(std::span<const double> radii, const DroneRepository& repo,
                                                     const altitude::AltitudeSolver& solver,
                                                     MatchingStrategy strategy) {
  if (repo.empty()) throw EmptyInputError("match_drones: repository is empty");
  std::vector<MatchedDisk> out(radii.size());
  for (std::size_t j = 0; j < radii.size(); ++j) out[j].altitude = solver.radius_to_power(radii[j]);

  std::vector<bool> used(repo.size(), false);
  const auto fits = [&](std::size_t i, double pt) {
    return !used[i] && repo[i].p_min_dbm <= pt && pt <= repo[i].p_max_dbm;
  };

  std::vector<std::size_t> order(radii.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (strategy == MatchingStrategy::kBestFit) {
    // Most demanding disks first, each to the weakest drone that suffices.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return out[a].altitude.pt_dbm > out[b].altitude.pt_dbm; });
  }
  for (std::size_t j : order) {
    const double pt = out[j].altitude.pt_dbm;
    std::optional<std::size_t> chosen;
    for (std::size_t i = 0; i < repo.size(); ++i) {
      if (!fits(i, pt)) continue;
      if (strategy == MatchingStrategy::kFirstFit) {
        chosen = i;
        break;
      }
      if (!chosen) {
        chosen = i;
        continue;
      }
      const DroneSpec& c = repo[*chosen];
      const DroneSpec& d = repo[i];
      if (std::tie(d.p_max_dbm, d.p_min_dbm, d.type_id) < std::tie(c.p_max_dbm, c.p_min_dbm, c.type_id)) chosen = i;
    }
    if (!chosen) return std::nullopt;
    used[*chosen] = true;
    out[j].drone = *chosen;
  }
  return out;
}

std::optional<PlacementSolution> build_solution(std::span<const Disk> disks, std::span<const std::size_t> owner,
                                                const DroneRepository& repo, const altitude::AltitudeSolver& solver,
                                                MatchingStrategy strategy) {
  std::vector<double> radii;
  radii.reserve(disks.size());
  for (const auto& d : disks) radii.push_back(d.radius);
  const auto matched = match_drones(radii, repo, solver, strategy);
  if (!matched) return std::nullopt;

  PlacementSolution sol;
  sol.M = disks.size();
  for (std::size_t i = 0; i < disks.size(); ++i) {
    const auto& m = (*matched)[i];
    sol.deployments.push_back(Deployment{static_cast<int>(m.drone), repo[m.drone].type_id, disks[i].center.x,
                                         disks[i].center.y, m.altitude.h_used, m.altitude.R, m.altitude.pt_dbm});
  }
  sol.partition.reserve(owner.size());
  for (std::size_t o : owner) sol.partition.push_back(sol.deployments.at(o).drone_id);
  sol.aggregate_power_w = aggregate_power_w(sol.deployments);
  return sol;
}

PlacementResult solve_placement(std::span<const GroundUser> users, const DroneRepository& repo,
                                const channel::Environment& env, const PlacementOptions& opts) {
  if (users.empty()) throw EmptyInputError("solve_placement: no users");
  if (repo.empty()) throw EmptyInputError("solve_placement: repository is empty");
  const altitude::AltitudeSolver solver(env);
  const std::vector<Point> pts = positions(users);

  // Largest radius any drone can serve; bigger frozen disks end the attempt early.
  double cap = -1.0;
  for (const auto& d : repo) {
    try {
      cap = std::max(cap, solver.power_to_radius(d.p_max_dbm).R);
    } catch (const NoCoverageError&) {
    }
  }

  // More disks than distinct locations only adds empty disks.
  const std::size_t max_m = std::min(repo.size(), distinct_points(pts).size());
  PlacementResult result;
  // Every disk costs at least the floor-radius power, so a partial cover's
  // frozen power plus that floor per remaining disk bounds its total.
  const double floor_w = units::dbm_to_watts(solver.radius_to_power(0.0).pt_dbm);
  double best_w = std::numeric_limits<double>::infinity();
  const AbandonPredicate over_budget = [&](std::span<const Disk> frozen, std::size_t left) {
    double w = static_cast<double>(left) * floor_w;
    for (const Disk& d : frozen) w += units::dbm_to_watts(solver.radius_to_power(d.radius).pt_dbm);
    return w > best_w;
  };
  const AbandonPredicate none;
  if (cap >= 0.0) {
    // Descending M meets the cheap many-disk covers first, which tightens the bound.
    for (std::size_t M = max_m; M >= 1; --M) {
      Rng rng = make_rng(opts.seed, "placement", M);
      const auto cover =
          recursive_radius_minimization(pts, M, opts.kcenter, rng, cap, opts.prune_by_power ? over_budget : none);
      if (!cover) continue;
      auto sol = build_solution(cover->disks, cover->owner, repo, solver, opts.matching);
      if (!sol) continue;
      best_w = std::min(best_w, sol->aggregate_power_w);
      result.candidates.push_back(std::move(*sol));
    }
  }
  if (result.candidates.empty()) throw NoFeasibleSolutionError("solve_placement: no feasible covering for any M");
  std::sort(result.candidates.begin(), result.candidates.end(),
            [](const PlacementSolution& a, const PlacementSolution& b) {
              return std::tie(a.aggregate_power_w, a.M) < std::tie(b.aggregate_power_w, b.M);
            });
  result.best = result.candidates.front();
  return result;
}

}  // namespace dbs::placement
