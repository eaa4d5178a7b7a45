#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "dbs/altitude.hpp"
#include "dbs/cli.hpp"
#include "dbs/error.hpp"

namespace dbs::cli {

namespace {

RunConfig resolve_config(const std::optional<std::filesystem::path>& path) {
  return path ? load_config(*path) : default_config();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << contents;
  if (!out) throw ConfigError("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Runs a command body, mapping library errors onto exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const NoFeasibleSolutionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = resolve_config(args.config);
    if (args.seed) cfg.scenario.seed = *args.seed;
    if (args.output_dir) cfg.output_dir = *args.output_dir;
    const auto users = scenario::scenario_users(cfg.scenario, cfg.scenario.seed);
    const scenario::ExperimentReport report = scenario::run_scenario(cfg.scenario, users, cfg.scenario.seed);
    write_file(cfg.output_dir / "solution.json", solution_to_json(cfg, users, report).dump(2) + "\n");
    write_file(cfg.output_dir / "solution.csv", solution_csv(report.solution));
    out << "deployed " << report.num_deployed << " drones, aggregate power " << format_number(report.aggregate_power_w)
        << " W, average rate " << format_number(report.avg_rate_bps) << " bps, unmet users "
        << report.rates.unmet_users << '\n';
    return report.all_rates_met ? kExitOk : kExitRateUnmet;
  });
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = resolve_config(args.config);
    if (args.seed) cfg.scenario.seed = *args.seed;
    scenario::SweepSpec spec;
    if (args.vary == "users") {
      spec.vary = scenario::SweepVariable::kUsers;
    } else if (args.vary == "density") {
      spec.vary = scenario::SweepVariable::kDensity;
    } else {
      throw ConfigError("--vary must be 'users' or 'density'");
    }
    if (args.baseline != "" && args.baseline != "voronoi") throw ConfigError("--baseline must be 'voronoi'");
    if (args.trials == 0) throw ConfigError("--trials must be >= 1");
    spec.values = parse_range(args.values);
    spec.trials = args.trials;
    spec.voronoi_baseline = args.baseline == "voronoi";
    for (double v : spec.values) scenario::apply_sweep_value(cfg.scenario, spec.vary, v);

    const auto rows = scenario::sweep(cfg.scenario, spec);
    std::ostringstream csv;
    csv << "value,mean_power_w,mean_rate_bps,mean_M,trials";
    if (spec.voronoi_baseline) csv << ",mean_voronoi_power_w";
    csv << '\n';
    for (const auto& r : rows) {
      csv << format_number(r.value) << ',' << format_number(r.mean_power_w) << ',' << format_number(r.mean_rate_bps)
          << ',' << format_number(r.mean_M) << ',' << r.trials;
      if (spec.voronoi_baseline) csv << ',' << format_number(r.mean_voronoi_power_w);
      csv << '\n';
      if (r.failures > 0) err << "value " << format_number(r.value) << ": " << r.failures << " infeasible trials\n";
      if (r.voronoi_infeasible > 0) {
        err << "value " << format_number(r.value) << ": " << r.voronoi_infeasible << " infeasible baseline trials\n";
      }
    }
    write_file(args.out.value_or(cfg.output_dir / "sweep.csv"), csv.str());
    out << "wrote " << rows.size() << " rows\n";
    return kExitOk;
  });
}

int cmd_channel(const ChannelArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    channel::Environment env = args.config ? load_config(*args.config).scenario.env : channel::preset(args.env);
    if (args.fc_hz) env.fc_hz = *args.fc_hz;
    env.validate();
    const std::vector<double> radii = parse_range(args.r);
    const std::vector<double> heights = parse_range(args.h);
    for (double r : radii)
      if (!(r >= 0.0)) throw ConfigError("--r values must be >= 0");
    for (double h : heights)
      if (!(h > 0.0)) throw ConfigError("--h values must be > 0");

    const altitude::AltitudeSolver solver(env);
    std::ostringstream csv;
    csv << "r_m,h_m,gamma_db,theta_opt_rad,h_opt_m,h_used_m\n";
    for (double r : radii) {
      const altitude::AltitudeSolution opt = solver.radius_to_power(r);
      for (double h : heights) {
        const double gamma = channel::mean_pathloss_db(channel::LinkGeometry(h, r), env);
        csv << format_number(r) << ',' << format_number(h) << ',' << format_number(gamma) << ','
            << format_number(opt.theta_opt) << ',' << format_number(opt.h_opt) << ',' << format_number(opt.h_used)
            << '\n';
      }
    }
    if (args.out) {
      write_file(*args.out, csv.str());
    } else {
      out << csv.str();
    }
    return kExitOk;
  });
}

int cmd_bargain(const BargainArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!(args.delta > 0.0 && args.delta < 1.0)) throw ConfigError("--delta must lie in (0, 1)");
    beamforming::KsbsMode mode;
    if (args.mode == "normalized_gain") {
      mode = beamforming::KsbsMode::kNormalizedGain;
    } else if (args.mode == "raw_fraction") {
      mode = beamforming::KsbsMode::kRawFraction;
    } else {
      throw ConfigError("--mode must be 'normalized_gain' or 'raw_fraction'");
    }
    std::optional<beamforming::InterferenceChannel> ch;
    if (args.channel_file && !args.random.empty()) throw ConfigError("use either --channel-file or --random");
    if (args.channel_file) {
      ch = parse_channel(read_file(*args.channel_file));
    } else if (args.random.size() == 3) {
      if (args.random[0] == 0 || args.random[1] == 0) throw ConfigError("--random needs M >= 1 and K >= 1");
      Rng rng = make_rng(args.random[2], "channel");
      ch = beamforming::InterferenceChannel::random(args.random[0], args.random[1], rng);
    } else {
      throw ConfigError("need --channel-file F or --random M K SEED");
    }
    const auto outcome = beamforming::ksbs_bisection(*ch, args.delta, mode);
    const std::string doc = outcome_to_json(outcome, args.delta).dump(2) + "\n";
    if (args.out) {
      write_file(*args.out, doc);
    } else {
      out << doc;
    }
    return kExitOk;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Placement and beamforming planner for drone base stations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dbs_planner 1.0.0");

  SolveArgs solve;
  auto* sub_solve = app.add_subcommand("solve", "Place drones for one user draw and evaluate rates");
  sub_solve->add_option("-c,--config", solve.config, "JSON run configuration");
  sub_solve->add_option("-o,--output", solve.output_dir, "Directory for solution.json and solution.csv");
  sub_solve->add_option("--seed", solve.seed, "Override the configured seed");

  SweepArgs sw;
  auto* sub_sweep = app.add_subcommand("sweep", "Monte Carlo sweep over user count or hotspot density");
  sub_sweep->add_option("-c,--config", sw.config, "JSON run configuration");
  sub_sweep->add_option("--vary", sw.vary, "users | density")->capture_default_str();
  sub_sweep->add_option("--values", sw.values, "Range a..b[:step] or comma list")->required();
  sub_sweep->add_option("--trials", sw.trials, "Trials per value")->capture_default_str();
  sub_sweep->add_option("--baseline", sw.baseline, "Add a baseline column (voronoi)");
  sub_sweep->add_option("-o,--out", sw.out, "CSV path (default <output>/sweep.csv)");
  sub_sweep->add_option("--seed", sw.seed, "Override the configured seed");

  ChannelArgs chn;
  auto* sub_channel = app.add_subcommand("channel", "Mean pathloss against altitude for fixed radial distances");
  sub_channel->set_help_flag("--help", "Print this help message and exit");  // frees -h for --h
  sub_channel->add_option("--env", chn.env, "Environment preset")->capture_default_str();
  sub_channel->add_option("-c,--config", chn.config, "Take the environment from a run configuration");
  sub_channel->add_option("--r", chn.r, "Radial distances in m")->capture_default_str();
  sub_channel->add_option("--h", chn.h, "Altitudes in m")->capture_default_str();
  sub_channel->add_option("--fc", chn.fc_hz, "Carrier frequency override in Hz");
  sub_channel->add_option("-o,--out", chn.out, "CSV path (default stdout)");

  BargainArgs bar;
  auto* sub_bargain = app.add_subcommand("bargain", "Bargaining beamformers for one interference channel");
  sub_bargain->add_option("--channel-file", bar.channel_file, "JSON channel file");
  sub_bargain->add_option("--random", bar.random, "Random channel: M K SEED")->expected(3);
  sub_bargain->add_option("--delta", bar.delta, "Bisection tolerance")->capture_default_str();
  sub_bargain->add_option("--mode", bar.mode, "normalized_gain | raw_fraction")->capture_default_str();
  sub_bargain->add_option("-o,--out", bar.out, "JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; anything else is a usage error.
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  if (sub_solve->parsed()) return cmd_solve(solve, out, err);
  if (sub_sweep->parsed()) return cmd_sweep(sw, out, err);
  if (sub_channel->parsed()) return cmd_channel(chn, out, err);
  return cmd_bargain(bar, out, err);
}

}  // namespace dbs::cli
