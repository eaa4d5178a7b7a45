#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "dbs/cli.hpp"
#include "dbs/error.hpp"

namespace dbs::cli {

using nlohmann::json;

namespace {

// Field-checked view of one JSON object.
class Fields {
 public:
  Fields(const json& j, std::string path, std::initializer_list<std::string_view> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
    for (const auto& [key, value] : j_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(child(key), "unknown field");
    }
  }

  bool has(std::string_view key) const { return j_.contains(key); }
  const json& at(std::string_view key) const { return j_.at(std::string(key)); }
  std::string child(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  void number(std::string_view key, double& dst) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number()) fail(child(key), "expected a number");
    dst = v.get<double>();
  }

  template <typename Int>
  void integer(std::string_view key, Int& dst, Int min_value) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      fail(child(key), "expected a non-negative integer");
    }
    const auto raw = v.get<std::uint64_t>();
    if (raw < static_cast<std::uint64_t>(min_value) || raw > std::numeric_limits<Int>::max()) {
      fail(child(key), "out of range");
    }
    dst = static_cast<Int>(raw);
  }

  void string(std::string_view key, std::string& dst) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_string()) fail(child(key), "expected a string");
    dst = v.get<std::string>();
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + ": " + what);
  }

 private:
  const json& j_;
  std::string path_;
};

channel::Environment read_environment(const json& j) {
  if (j.is_string()) return channel::preset(j.get<std::string>());
  const Fields f(j, "environment",
                 {"preset", "a", "b", "eta_los_db", "eta_nlos_db", "fc_hz", "epsilon_dbm", "h_max_m"});
  std::string base = "urban";
  f.string("preset", base);
  channel::Environment env = channel::preset(base);
  f.number("a", env.a);
  f.number("b", env.b);
  f.number("eta_los_db", env.eta_los_db);
  f.number("eta_nlos_db", env.eta_nlos_db);
  f.number("fc_hz", env.fc_hz);
  f.number("epsilon_dbm", env.epsilon_dbm);
  f.number("h_max_m", env.h_max_m);
  return env;
}

placement::DroneRepository read_repository(const json& j) {
  if (!j.is_array()) Fields::fail("repository", "expected an array");
  if (j.empty()) throw ConfigError("config: repository must be non-empty");
  std::vector<placement::DroneType> types;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = "repository[" + std::to_string(i) + "]";
    const Fields f(j[i], path, {"p_min_dbm", "p_max_dbm", "count"});
    if (!f.has("p_max_dbm")) Fields::fail(path + ".p_max_dbm", "required");
    placement::DroneType t;
    if (f.has("p_min_dbm") && f.at("p_min_dbm").is_null()) {
      t.p_min_dbm = -std::numeric_limits<double>::infinity();
    } else {
      f.number("p_min_dbm", t.p_min_dbm);
    }
    f.number("p_max_dbm", t.p_max_dbm);
    f.integer("count", t.count, 1);
    if (!(t.p_min_dbm <= t.p_max_dbm)) Fields::fail(path, "p_min_dbm exceeds p_max_dbm");
    types.push_back(t);
  }
  return placement::make_repository(types);
}

scenario::AreaConfig read_area(const json& j) {
  const Fields f(j, "area", {"lx_m", "ly_m", "origin"});
  scenario::AreaConfig area;
  f.number("lx_m", area.lx_m);
  f.number("ly_m", area.ly_m);
  std::string origin = "centered";
  f.string("origin", origin);
  if (origin == "centered") {
    area.origin = scenario::AreaConfig::Origin::kCentered;
  } else if (origin == "corner") {
    area.origin = scenario::AreaConfig::Origin::kCorner;
  } else {
    Fields::fail("area.origin", "expected \"centered\" or \"corner\"");
  }
  if (!(area.lx_m > 0.0) || !(area.ly_m > 0.0)) Fields::fail("area", "side lengths must be positive");
  return area;
}

void read_users(const json& j, RunConfig& cfg) {
  const Fields f(j, "users", {"count", "distribution"});
  f.integer("count", cfg.scenario.num_users, std::size_t{1});
  if (!f.has("distribution")) return;
  const Fields d(f.at("distribution"), "users.distribution",
                 {"kind", "mu_x_m", "mu_y_m", "sigma_x_m", "sigma_y_m"});
  auto& dist = cfg.scenario.distribution;
  std::string kind = "uniform";
  d.string("kind", kind);
  if (kind == "uniform") {
    dist.kind = scenario::DistributionSpec::Kind::kUniform;
  } else if (kind == "truncated_gaussian") {
    dist.kind = scenario::DistributionSpec::Kind::kTruncatedGaussian;
  } else {
    Fields::fail("users.distribution.kind", "expected \"uniform\" or \"truncated_gaussian\"");
  }
  d.number("mu_x_m", dist.mu_x_m);
  d.number("mu_y_m", dist.mu_y_m);
  d.number("sigma_x_m", dist.sigma_x_m);
  d.number("sigma_y_m", dist.sigma_y_m);
  try {
    dist.validate();
  } catch (const DomainError& e) {
    Fields::fail("users.distribution", e.what());
  }
}

void read_radio(const json& j, scenario::RadioConfig& radio) {
  const Fields f(j, "radio", {"bandwidth_hz", "noise_dbm", "beta_bps", "num_antennas"});
  f.number("bandwidth_hz", radio.bandwidth_hz);
  f.number("noise_dbm", radio.noise_dbm);
  f.number("beta_bps", radio.beta_bps);
  f.integer("num_antennas", radio.num_antennas, std::size_t{1});
  try {
    radio.validate();
  } catch (const DomainError& e) {
    Fields::fail("radio", e.what());
  }
}

void read_algorithm(const json& j, scenario::PipelineOptions& opts) {
  const Fields f(j, "algorithm", {"restarts", "max_iters", "delta", "matching", "ksbs_mode", "prune_by_power"});
  f.integer("restarts", opts.placement.kcenter.restarts, 1);
  f.integer("max_iters", opts.placement.kcenter.max_iters, 1);
  f.number("delta", opts.bargaining.delta);
  if (!(opts.bargaining.delta > 0.0 && opts.bargaining.delta < 1.0)) Fields::fail("algorithm.delta", "must lie in (0, 1)");
  std::string matching = "best_fit";
  f.string("matching", matching);
  if (matching == "best_fit") {
    opts.placement.matching = placement::MatchingStrategy::kBestFit;
  } else if (matching == "first_fit") {
    opts.placement.matching = placement::MatchingStrategy::kFirstFit;
  } else {
    Fields::fail("algorithm.matching", "expected \"best_fit\" or \"first_fit\"");
  }
  std::string mode = "normalized_gain";
  f.string("ksbs_mode", mode);
  if (mode == "normalized_gain") {
    opts.bargaining.mode = beamforming::KsbsMode::kNormalizedGain;
  } else if (mode == "raw_fraction") {
    opts.bargaining.mode = beamforming::KsbsMode::kRawFraction;
  } else {
    Fields::fail("algorithm.ksbs_mode", "expected \"normalized_gain\" or \"raw_fraction\"");
  }
  if (f.has("prune_by_power")) {
    if (!f.at("prune_by_power").is_boolean()) Fields::fail("algorithm.prune_by_power", "expected a boolean");
    opts.placement.prune_by_power = f.at("prune_by_power").get<bool>();
  }
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

RunConfig default_config() {
  RunConfig cfg;
  cfg.scenario.env = channel::urban();
  const double no_floor = -std::numeric_limits<double>::infinity();
  const std::vector<placement::DroneType> types = {{no_floor, 35.0, 4}, {no_floor, 39.0, 4}, {no_floor, 43.0, 4}};
  cfg.scenario.repo = placement::make_repository(types);
  return cfg;
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // byte is 1-based and points one past the offending character.
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw ConfigError("config: line " + std::to_string(line_of(text, at)) + ": malformed JSON (" + e.what() + ")");
  }
  const Fields top(doc, "", {"environment", "repository", "area", "users", "radio", "algorithm", "seed", "output"});
  RunConfig cfg = default_config();
  try {
    if (top.has("environment")) cfg.scenario.env = read_environment(top.at("environment"));
    cfg.scenario.env.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    Fields::fail("environment", e.what());
  }
  if (top.has("repository")) cfg.scenario.repo = read_repository(top.at("repository"));
  if (top.has("area")) cfg.scenario.area = read_area(top.at("area"));
  if (top.has("users")) read_users(top.at("users"), cfg);
  if (top.has("radio")) read_radio(top.at("radio"), cfg.scenario.radio);
  if (top.has("algorithm")) read_algorithm(top.at("algorithm"), cfg.scenario.options);
  top.integer("seed", cfg.scenario.seed, std::uint64_t{0});
  std::string output = cfg.output_dir.string();
  top.string("output", output);
  cfg.output_dir = output;
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

json config_to_json(const RunConfig& cfg) {
  const auto& s = cfg.scenario;
  json env = {{"a", s.env.a},           {"b", s.env.b},
              {"eta_los_db", s.env.eta_los_db}, {"eta_nlos_db", s.env.eta_nlos_db},
              {"fc_hz", s.env.fc_hz},   {"epsilon_dbm", s.env.epsilon_dbm},
              {"h_max_m", s.env.h_max_m}};
  json repo = json::array();
  // Consecutive drones of one type collapse back into a single entry.
  for (std::size_t i = 0; i < s.repo.size();) {
    std::size_t j = i;
    while (j < s.repo.size() && s.repo[j].type_id == s.repo[i].type_id) ++j;
    json e = {{"p_max_dbm", s.repo[i].p_max_dbm}, {"count", j - i}};
    if (std::isfinite(s.repo[i].p_min_dbm)) e["p_min_dbm"] = s.repo[i].p_min_dbm;
    repo.push_back(e);
    i = j;
  }
  const bool gaussian = s.distribution.kind == scenario::DistributionSpec::Kind::kTruncatedGaussian;
  json doc = {
      {"environment", env},
      {"repository", repo},
      {"area",
       {{"lx_m", s.area.lx_m},
        {"ly_m", s.area.ly_m},
        {"origin", s.area.origin == scenario::AreaConfig::Origin::kCentered ? "centered" : "corner"}}},
      {"users",
       {{"count", s.num_users},
        {"distribution",
         {{"kind", gaussian ? "truncated_gaussian" : "uniform"},
          {"mu_x_m", s.distribution.mu_x_m},
          {"mu_y_m", s.distribution.mu_y_m},
          {"sigma_x_m", s.distribution.sigma_x_m},
          {"sigma_y_m", s.distribution.sigma_y_m}}}}},
      {"radio",
       {{"bandwidth_hz", s.radio.bandwidth_hz},
        {"noise_dbm", s.radio.noise_dbm},
        {"beta_bps", s.radio.beta_bps},
        {"num_antennas", s.radio.num_antennas}}},
      {"algorithm",
       {{"restarts", s.options.placement.kcenter.restarts},
        {"max_iters", s.options.placement.kcenter.max_iters},
        {"delta", s.options.bargaining.delta},
        {"matching", s.options.placement.matching == placement::MatchingStrategy::kBestFit ? "best_fit" : "first_fit"},
        {"ksbs_mode",
         s.options.bargaining.mode == beamforming::KsbsMode::kNormalizedGain ? "normalized_gain" : "raw_fraction"},
        {"prune_by_power", s.options.placement.prune_by_power}}},
      {"seed", s.seed},
      {"output", cfg.output_dir.string()}};
  return doc;
}

std::vector<double> parse_range(std::string_view text) {
  const auto number = [&](std::string_view tok) {
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || end != tok.data() + tok.size() || !std::isfinite(v)) {
      throw ConfigError("invalid range '" + std::string(text) + "': bad number '" + std::string(tok) + "'");
    }
    return v;
  };
  std::vector<double> out;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const double lo = number(text.substr(0, dots));
    std::string_view rest = text.substr(dots + 2);
    double step = 1.0;
    if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
      step = number(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    const double hi = number(rest);
    if (!(step > 0.0) || hi < lo) throw ConfigError("invalid range '" + std::string(text) + "'");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step * (1.0 + 1e-12))) + 1;
    if (n > 10'000'000) throw ConfigError("invalid range '" + std::string(text) + "': too many values");
    for (std::size_t i = 0; i < n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  } else {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      const auto end = comma == std::string_view::npos ? text.size() : comma;
      out.push_back(number(text.substr(start, end - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

}  // namespace dbs::cli
