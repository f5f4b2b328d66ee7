#include "coevo/cli.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <sstream>

#include "coevo/analysis.hpp"
#include "coevo/error.hpp"
#include "coevo/io.hpp"
#include "coevo/kernels.hpp"
#include "io_common.hpp"

namespace coevo {
namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  std::string kernel;
  std::string out;
  std::string format;
  int max_n = kDefaultMaxEnumeration;
  int player = 0;
  std::string opinions;
  bool json_output = false;
};

std::vector<double> parse_opinion_list(const std::string& text, int n) {
  std::vector<double> y;
  for (std::string_view cell : io::detail::split(text, ',')) {
    const auto v = io::detail::parse_double(cell);
    if (!v) throw ValidationError("--y: '" + std::string(cell) + "' is not a number");
    y.push_back(*v);
  }
  if (static_cast<int>(y.size()) != n) {
    throw ValidationError("--y has " + std::to_string(y.size()) + " values, expected " +
                          std::to_string(n));
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] >= 0.0 && y[i] <= 1.0)) {
      throw ValidationError("--y: opinion of player " + std::to_string(i + 1) +
                            " is outside [0, 1]");
    }
  }
  return y;
}

void emit(const std::optional<std::filesystem::path>& path, const std::string& text,
          std::ostream& out) {
  if (path) {
    io::write_file_atomic(*path, text);
  } else {
    out << text;
  }
}

std::optional<std::filesystem::path> output_path(const Options& o,
                                                 const std::optional<std::filesystem::path>& cfg) {
  if (!o.out.empty()) return std::filesystem::path(o.out);
  return cfg;
}

int cmd_validate(const io::ExperimentConfig& cfg, const Options& o, std::ostream& out) {
  if (!o.quiet) {
    out << "valid: n=" << cfg.params.n() << " r=" << io::format_real(cfg.params.r())
        << " strict_interior=" << (cfg.params.strict_interior() ? "yes" : "no")
        << " symmetric=" << (cfg.network.is_symmetric() ? "yes" : "no")
        << " irreducible=" << (cfg.network.is_irreducible() ? "yes" : "no") << '\n';
  }
  return kExitOk;
}

int cmd_simulate(const io::ExperimentConfig& cfg, const Options& o, std::ostream& out,
                 std::ostream& err) {
  const RevisionSchedule schedule = cfg.schedule();
  if (!schedule.covers_all_players() && !o.quiet) {
    err << "warning: iid-random schedule gives no bounded revision window; "
           "convergence results for the all-defection condition do not apply\n";
  }
  const io::TrajectoryFormat format =
      o.format.empty() ? cfg.outputs.trajectory_format : io::parse_trajectory_format(o.format);
  const Trajectory traj = run(cfg.initial_state(), schedule, cfg.params, cfg.network, cfg.run);
  emit(output_path(o, cfg.outputs.trajectory), io::format_trajectory(traj, format), out);
  if (!o.quiet) {
    const StateClass cls = classify_state(traj.final_state);
    err << "stopped after " << traj.steps << " steps (" << to_string(traj.stop_reason)
        << "), final class " << to_string(cls.full_class) << '\n';
  }
  return kExitOk;
}

int cmd_enumerate(const io::ExperimentConfig& cfg, const Options& o, std::ostream& out,
                  std::ostream& err) {
  const EquilibriumReport report = enumerate_equilibria(cfg.params, cfg.network, o.max_n);
  emit(output_path(o, cfg.outputs.report), io::to_json(report).dump(2) + "\n", out);
  if (!o.quiet) {
    err << report.equilibria.size() << " equilibria, " << report.boundary_equilibria.size()
        << " boundary equilibria over " << report.action_profiles_scanned << " action profiles\n";
  }
  return kExitOk;
}

int cmd_check_conditions(const io::ExperimentConfig& cfg, const Options& o, std::ostream& out) {
  const ConditionReport unique = check_all_defection_unique(cfg.params);
  const ConditionReport coop = check_all_cooperation_exists(cfg.params);
  if (o.json_output) {
    const nlohmann::json doc = {{"conditions", {io::to_json(unique), io::to_json(coop)}}};
    emit(output_path(o, std::nullopt), doc.dump(2) + "\n", out);
    return kExitOk;
  }
  std::ostringstream text;
  for (const ConditionReport* rep : {&unique, &coop}) {
    std::size_t holding = 0;
    for (const ConditionTerm& t : rep->per_player) holding += t.holds ? 1 : 0;
    text << to_string(rep->condition_id) << ": ";
    if (holding == rep->per_player.size()) {
      text << "holds for all " << holding << " players\n";
    } else if (holding == 0) {
      text << "fails for all " << rep->per_player.size() << " players\n";
    } else {
      text << "holds for " << holding << " of " << rep->per_player.size() << " players\n";
    }
    for (std::size_t i = 0; i < rep->per_player.size(); ++i) {
      const ConditionTerm& t = rep->per_player[i];
      text << "  player " << i + 1 << ": lhs=" << io::format_real(t.lhs)
           << " rhs=" << io::format_real(t.rhs) << (t.holds ? " holds" : " fails") << '\n';
    }
  }
  emit(output_path(o, std::nullopt), text.str(), out);
  return kExitOk;
}

int cmd_best_response(const io::ExperimentConfig& cfg, const Options& o, std::ostream& out) {
  const int n = cfg.params.n();
  if (o.player < 1 || o.player > n) {
    throw ValidationError("--player must lie in 1.." + std::to_string(n));
  }
  const std::vector<double> y =
      o.opinions.empty() ? cfg.initial_state().y : parse_opinion_list(o.opinions, n);
  const BestResponseSet br = best_response(o.player - 1, y, cfg.params, cfg.network);
  emit(output_path(o, std::nullopt), io::to_json(br, o.player - 1).dump(2) + "\n", out);
  return kExitOk;
}

int cmd_sweep(const io::ExperimentConfig& cfg, const Options& o, std::ostream& out,
              std::ostream& err) {
  io::SweepSpec spec;
  if (cfg.sweep) {
    spec = *cfg.sweep;
  } else {
    const PlayerWeights& p = cfg.params.player(0);
    spec.grid = {{cfg.params.r()}, {p.alpha}, {p.beta}};
  }
  const SweepTable table = sweep(spec.grid, cfg.network, cfg.schedule(), spec.options);
  if (!o.quiet) {
    for (const std::string& w : table.warnings) err << "warning: " << w << '\n';
    for (const SweepCell& c : table.cells) {
      if (!c.valid) err << "skipped cell: " << c.error << '\n';
    }
  }
  emit(output_path(o, cfg.outputs.sweep), io::format_sweep_csv(table), out);
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Public-goods / opinion coevolution engine", "coevo"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", o.config, "Experiment config (JSON)")->required();
    sub->add_option("--seed", o.seed, "Override every seed in the config");
    sub->add_flag("--quiet,-q", o.quiet, "Suppress progress output");
    sub->add_option("--kernel", o.kernel, "Force kernel path: scalar or avx2");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Run the best-response dynamics");
  add_common(simulate);
  simulate->add_option("--out,-o", o.out, "Trajectory output path (default: config or stdout)");
  simulate->add_option("--format", o.format, "csv or json-lines");

  CLI::App* enumerate = app.add_subcommand("enumerate", "Enumerate all equilibria (small n)");
  add_common(enumerate);
  enumerate->add_option("--out,-o", o.out, "Report output path");
  enumerate->add_option("--max-n", o.max_n, "Largest population to enumerate");

  CLI::App* check = app.add_subcommand("check-conditions",
                                       "Evaluate the consensus-equilibrium conditions");
  add_common(check);
  check->add_option("--out,-o", o.out, "Output path");
  check->add_flag("--json", o.json_output, "Emit JSON reports");

  CLI::App* br = app.add_subcommand("best-response", "Best-response set of one player");
  add_common(br);
  br->add_option("--player,-i", o.player, "Player id (1-indexed)")->required();
  br->add_option("--y", o.opinions, "Comma-separated opinions (default: initial state)");
  br->add_option("--out,-o", o.out, "Output path");

  CLI::App* sw = app.add_subcommand("sweep", "Parameter sweep");
  add_common(sw);
  sw->add_option("--out,-o", o.out, "Sweep table output path (CSV)");

  CLI::App* validate = app.add_subcommand("validate", "Load and validate a config");
  add_common(validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitValidation;
  }

  try {
    if (!o.kernel.empty()) kernels::set_kernel_path(kernels::parse_kernel_path(o.kernel));
    const io::ExperimentConfig cfg = io::load_config(o.config, o.seed);

    if (simulate->parsed()) return cmd_simulate(cfg, o, out, err);
    if (enumerate->parsed()) return cmd_enumerate(cfg, o, out, err);
    if (check->parsed()) return cmd_check_conditions(cfg, o, out);
    if (br->parsed()) return cmd_best_response(cfg, o, out);
    if (sw->parsed()) return cmd_sweep(cfg, o, out, err);
    return cmd_validate(cfg, o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "fault: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace coevo
