#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "dbs/cli.hpp"
#include "dbs/error.hpp"

namespace dbs::cli {

using nlohmann::json;

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  if (ec != std::errc{}) throw Error("format_number: conversion failed");
  return std::string(buf.data(), end);
}

namespace {

[[noreturn]] void bad_channel(const std::string& what) { throw ConfigError("channel file: " + what); }

std::size_t read_count(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number_unsigned() || doc[key].get<std::size_t>() == 0) {
    bad_channel(std::string("'") + key + "' must be a positive integer");
  }
  return doc[key].get<std::size_t>();
}

json complex_vector(const beamforming::CVector& v) {
  json arr = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back({v[k].real(), v[k].imag()});
  return arr;
}

}  // namespace

beamforming::InterferenceChannel parse_channel(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    bad_channel(std::string("malformed JSON (") + e.what() + ")");
  }
  if (!doc.is_object()) bad_channel("expected an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "M" && key != "K" && key != "H" && key != "sigma2") bad_channel("unknown field '" + key + "'");
  }
  const std::size_t M = read_count(doc, "M");
  const std::size_t K = read_count(doc, "K");
  double sigma2 = 1.0;
  if (doc.contains("sigma2")) {
    if (!doc["sigma2"].is_number() || !(doc["sigma2"].get<double>() > 0.0)) bad_channel("'sigma2' must be positive");
    sigma2 = doc["sigma2"].get<double>();
  }
  const json& H = doc.contains("H") ? doc["H"] : json();
  if (!H.is_array() || H.size() != M) bad_channel("'H' must have M entries");
  beamforming::InterferenceChannel ch(M, K, sigma2);
  for (std::size_t l = 0; l < M; ++l) {
    if (!H[l].is_array() || H[l].size() != M) bad_channel("H[" + std::to_string(l) + "] must have M entries");
    for (std::size_t m = 0; m < M; ++m) {
      const json& vec = H[l][m];
      const std::string where = "H[" + std::to_string(l) + "][" + std::to_string(m) + "]";
      if (!vec.is_array() || vec.size() != K) bad_channel(where + " must have K entries");
      for (std::size_t k = 0; k < K; ++k) {
        const json& c = vec[k];
        if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
          bad_channel(where + "[" + std::to_string(k) + "] must be [re, im]");
        }
        ch.h(l, m)[static_cast<Eigen::Index>(k)] = {c[0].get<double>(), c[1].get<double>()};
      }
    }
  }
  try {
    ch.validate();
  } catch (const Error& e) {
    bad_channel(e.what());
  }
  return ch;
}

json outcome_to_json(const beamforming::BargainingOutcome& out, double delta) {
  json beams = json::array();
  for (const auto& w : out.beamformers) beams.push_back(complex_vector(w));
  json steps = json::array();
  for (const auto& s : out.steps) steps.push_back({{"r", s.r}, {"feasible", s.feasible}});
  return {{"ne_rates", out.ne_rates},
          {"max_rates", out.max_rates},
          {"ksbs_rates", out.ksbs_rates},
          {"fraction", out.fraction},
          {"fractions_of_max", out.fractions_of_max},
          {"iterations", out.iterations},
          {"iteration_bound", static_cast<std::size_t>(std::ceil(std::log2(1.0 / delta)))},
          {"delta", delta},
          {"steps", steps},
          {"beamformers", beams}};
}

json solution_to_json(const RunConfig& cfg, std::span<const placement::GroundUser> users,
                      const scenario::ExperimentReport& report) {
  json deployments = json::array();
  for (const auto& d : report.solution.deployments) {
    deployments.push_back({{"drone_id", d.drone_id},
                           {"type_id", d.type_id},
                           {"x", d.x},
                           {"y", d.y},
                           {"h", d.h},
                           {"R", d.R},
                           {"pt_dbm", d.pt_dbm}});
  }
  json user_list = json::array();
  json rates = json::array();
  const auto& ev = report.rates;
  for (std::size_t k = 0; k < users.size(); ++k) {
    user_list.push_back({{"id", users[k].id}, {"x", users[k].x}, {"y", users[k].y}});
    rates.push_back({{"user_id", users[k].id},
                     {"serving_drone", ev.serving_drone[k]},
                     {"rate_bps", ev.per_user_rate_bps[k]},
                     {"satisfied", static_cast<bool>(ev.rate_satisfied[k])},
                     {"required_power_w", ev.required_power_w[k]}});
  }
  json groups = json::array();
  for (const auto& g : ev.groups) {
    groups.push_back({{"drone_ids", g.drone_ids},
                      {"representative_users", g.representative_users},
                      {"ne_rates", g.outcome.ne_rates},
                      {"max_rates", g.outcome.max_rates},
                      {"ksbs_rates", g.outcome.ksbs_rates},
                      {"fraction", g.outcome.fraction},
                      {"iterations", g.outcome.iterations}});
  }
  json trace = json::array();
  for (const auto& t : report.convergence_trace) {
    trace.push_back({{"outer_iter", t.outer_iter}, {"M", t.M}, {"unmet_users", t.unmet_users}});
  }
  return {{"config", config_to_json(cfg)},
          {"M", report.num_deployed},
          {"aggregate_power_w", report.aggregate_power_w},
          {"avg_rate_bps", report.avg_rate_bps},
          {"all_rates_met", report.all_rates_met},
          {"deployments", deployments},
          {"partition", report.solution.partition},
          {"users", user_list},
          {"rates", rates},
          {"bargaining_groups", groups},
          {"convergence_trace", trace}};
}

std::string solution_csv(const placement::PlacementSolution& sol) {
  std::ostringstream out;
  out << "drone_id,x,y,h,R,pt_dbm\n";
  for (const auto& d : sol.deployments) {
    out << d.drone_id << ',' << format_number(d.x) << ',' << format_number(d.y) << ',' << format_number(d.h) << ','
        << format_number(d.R) << ',' << format_number(d.pt_dbm) << '\n';
  }
  return out.str();
}

LoadedSolution load_solution(const json& doc) {
  LoadedSolution saved;
  try {
    saved.config = parse_config(doc.at("config").dump());
    for (const auto& u : doc.at("users")) {
      saved.users.push_back({u.at("id").get<int>(), u.at("x").get<double>(), u.at("y").get<double>()});
    }
    auto& sol = saved.solution;
    for (const auto& d : doc.at("deployments")) {
      sol.deployments.push_back({d.at("drone_id").get<int>(), d.at("type_id").get<int>(), d.at("x").get<double>(),
                                 d.at("y").get<double>(), d.at("h").get<double>(), d.at("R").get<double>(),
                                 d.at("pt_dbm").get<double>()});
    }
    sol.partition = doc.at("partition").get<std::vector<int>>();
    sol.M = sol.deployments.size();
    sol.aggregate_power_w = placement::aggregate_power_w(sol.deployments);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("solution file: ") + e.what());
  }
  return saved;
}

scenario::RateEvaluation recompute_rates(const LoadedSolution& saved) {
  const auto& s = saved.config.scenario;
  return scenario::evaluate_rates(saved.users, saved.solution, s.env, s.radio, s.options.bargaining,
                                  scenario::fading_seed(s.seed));
}

}  // namespace dbs::cli
