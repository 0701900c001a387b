// Command line front end for the coupled Schrodinger solver.
//
// Subcommands:
//   run          march one configuration and write step logs plus snapshots
//   convergence  run a mesh ladder against a manufactured soliton
//   truncation   measure the local truncation order (space or time regime)
//   oracle       certify the manufactured forcing terms against the PDE
//
// Exit codes: 0 success, 2 scheme divergence, 3 configuration error,
// 1 anything else.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cnls/cnls.hpp"

namespace fs = std::filesystem;
using namespace cnls;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  int snapshots = -1;  // run only: override snapshot cadence, -1 keeps config
};

Config load_config(const CommonArgs& args) {
  if (args.config_path.empty()) return Config::parse("");
  return Config::load(args.config_path);
}

struct RunSetup {
  ExperimentKind kind;
  SolitonParams sol;
  SpatialGrid grid;
  TimeGrid tgrid;
  SchemeParams params;
  NonlinearMode mode;
  RightFactor rf;
  WeightRule rule;
  bool forced = true;
  BootstrapMode boot;
  double fp_tol = 1e-12;
  int fp_max = 50;
  double blowup_factor = 1e6;
  int snapshot_every = 10;
};

RunSetup setup_from(const Config& cfg) {
  RunSetup s;
  s.kind = parse_kind(cfg.get_string("experiment", "axis_aligned"));
  s.sol = soliton_params(s.kind, cfg.get_double("a", 0.01), cfg.get_double("c", 0.1),
                         cfg.get_double("phi_u", 0.0), cfg.get_double("phi_v", 0.0));
  s.grid = build_grid(cfg.get_double("L0", -80.0), cfg.get_double("L1", 100.0),
                      cfg.get_int("J", 63));
  s.tgrid = build_time_grid(cfg.get_double("t0", 0.0), cfg.get_double("l", 0.1),
                            cfg.get_int("n_steps", 100));
  s.params = make_scheme_params(cfg.get_double("sigma1", 1.0), cfg.get_double("sigma2", 1.0),
                                cfg.get_double("lambda", 1.0), cfg.get_double("p", 2.5),
                                cfg.get_double("mu1", 0.25), cfg.get_double("mu2", 0.5),
                                cfg.get_double("mu3", 0.25), cfg.get_int("kappa", 2));
  s.mode = parse_mode(cfg.get_string("mode", "split"));
  s.rf = parse_right_factor(cfg.get_string("right_factor", "same"));
  s.rule = parse_weight_rule(cfg.get_string("weight_rule", "time_scaled"));
  const std::string forcing = cfg.get_string("forcing", "manufactured");
  if (forcing != "manufactured" && forcing != "none")
    throw ConfigError("unknown forcing '" + forcing + "'");
  s.forced = forcing == "manufactured";
  s.boot = parse_bootstrap(cfg.get_string("bootstrap", "exact"));
  s.fp_tol = cfg.get_double("fp_tol", 1e-12);
  s.fp_max = cfg.get_int("fp_max", 50);
  s.blowup_factor = cfg.get_double("blowup_factor", 1e6);
  s.snapshot_every = cfg.get_int("snapshot_every", 10);
  return s;
}

int cmd_run(const CommonArgs& args) {
  Config cfg = load_config(args);
  RunSetup s = setup_from(cfg);
  if (args.snapshots >= 0) s.snapshot_every = args.snapshots;

  SourceFn source;
  if (s.forced)
    source = [&s](double t) { return forcing_fields(s.kind, s.sol, s.grid, t); };
  SchemeSystem sys = make_scheme_system(s.grid, s.tgrid, s.params, s.mode, s.rf, s.rule, source);

  StatePair w0 = exact_fields(s.kind, s.sol, s.grid, s.tgrid.start);
  ThreeLevelState st;
  if (s.boot == BootstrapMode::exact_samples) {
    auto sampler = [&s](double t) { return exact_fields(s.kind, s.sol, s.grid, t); };
    st = bootstrap(w0, BootstrapMode::exact_samples, s.tgrid, nullptr, sampler);
  } else {
    StatePair w1 = velocity_fields(s.kind, s.sol, s.grid, s.tgrid.start);
    st = bootstrap(w0, BootstrapMode::taylor_from_velocity, s.tgrid, &w1);
  }

  std::vector<StepRecord> steps;
  ErrorReport report;
  auto track = [&](const ThreeLevelState& cur) {
    StepRecord rec{cur.n, cur.t, l2_norm(cur.current.u), l2_norm(cur.current.v), {}, {}};
    if (s.forced) {
      StatePair exact = exact_fields(s.kind, s.sol, s.grid, cur.t);
      double eu = l2_norm(cur.current.u - exact.u);
      double ev = l2_norm(cur.current.v - exact.v);
      rec.err_u = eu;
      rec.err_v = ev;
      report.per_step.push_back(StepError{cur.n, cur.t, eu, ev});
      double rel = std::max(eu / std::max(l2_norm(exact.u), 1e-300),
                            ev / std::max(l2_norm(exact.v), 1e-300));
      report.rel_er = std::max(report.rel_er, rel);
    }
    steps.push_back(std::move(rec));
  };

  RunOptions opts;
  opts.fp_tol = s.fp_tol;
  opts.fp_max = s.fp_max;
  opts.blowup_factor = s.blowup_factor;
  opts.snapshot_every = s.snapshot_every;
  opts.observer = track;
  RunResult rr = run(st, sys, opts);

  const fs::path out(args.out_dir);
  write_text_file(out / "steps.csv", emit_steps(steps));
  for (const Snapshot& snap : rr.snapshots) write_snapshot(out / "snapshots", snap);

  if (s.forced && !report.per_step.empty()) {
    report.er = std::max(report.per_step.back().err_u, report.per_step.back().err_v);
    ResultRow row;
    row.experiment = kind_name(s.kind);
    row.J = s.grid.last_index;
    row.h = s.grid.step;
    row.l = s.tgrid.step;
    row.mu1 = s.params.mu1;
    row.mu2 = s.params.mu2;
    row.mu3 = s.params.mu3;
    row.kappa = s.params.kappa;
    row.er = report.er;
    row.rel_er = report.rel_er;
    write_text_file(out / "run.csv", emit_results({row}));
  }

  const NormSample& last = rr.monitor.norm_history.back();
  std::cout << "run: " << kind_name(s.kind) << " J=" << s.grid.last_index
            << " steps=" << s.tgrid.step_count << " final |U|=" << format_double(last.norm_u)
            << " |V|=" << format_double(last.norm_v)
            << " max_fp=" << rr.monitor.max_fp_iterations << "\n";
  if (s.forced && !report.per_step.empty())
    std::cout << "     Er=" << format_double(report.er)
              << " RelEr=" << format_double(report.rel_er) << "\n";
  if (rr.monitor.diverged) {
    std::cout << "     DIVERGED at step " << rr.monitor.divergence_step.value_or(-1) << "\n";
    return 2;
  }
  return 0;
}

int cmd_convergence(const CommonArgs& args) {
  Config cfg = load_config(args);
  ConvergenceConfig cc;
  cc.kind = parse_kind(cfg.get_string("experiment", "axis_aligned"));
  cc.sol = soliton_params(cc.kind, cfg.get_double("a", 0.01), cfg.get_double("c", 0.1),
                          cfg.get_double("phi_u", 0.0), cfg.get_double("phi_v", 0.0));
  cc.lower = cfg.get_double("L0", -80.0);
  cc.upper = cfg.get_double("L1", 100.0);
  cc.params = make_scheme_params(cfg.get_double("sigma1", 1.0), cfg.get_double("sigma2", 1.0),
                                 cfg.get_double("lambda", 1.0), cfg.get_double("p", 2.5),
                                 cfg.get_double("mu1", 0.25), cfg.get_double("mu2", 0.5),
                                 cfg.get_double("mu3", 0.25), cfg.get_int("kappa", 2));
  cc.ladder = cfg.get_int_list("ladder_J", {15, 31, 63});
  cc.l_over_h2 = cfg.get_double("l_over_h2", 0.04);
  cc.t_final = cfg.get_double("t_final", 10.125);
  cc.t_start = cfg.get_double("t0", 0.0);
  cc.mode = parse_mode(cfg.get_string("mode", "split"));
  cc.right_factor = parse_right_factor(cfg.get_string("right_factor", "same"));
  cc.bootstrap_mode = parse_bootstrap(cfg.get_string("bootstrap", "exact"));
  cc.fp_tol = cfg.get_double("fp_tol", 1e-12);
  cc.fp_max = cfg.get_int("fp_max", 50);

  ConvergenceResult res = convergence_study(cc);
  write_text_file(fs::path(args.out_dir) / "convergence.csv", emit_results(res.rows));

  for (const ConvergenceLevel& lev : res.levels)
    std::cout << "convergence: J=" << lev.J << " h=" << format_double(lev.h)
              << " l=" << format_double(lev.l) << " Er=" << format_double(lev.errors.er)
              << " RelEr=" << format_double(lev.errors.rel_er) << "\n";
  std::cout << "convergence: Er monotone = " << (res.er_monotone ? "yes" : "no")
            << ", observed orders =";
  for (double o : res.observed_orders) std::cout << ' ' << format_double(o);
  std::cout << "\n";
  return 0;
}

int cmd_truncation(const CommonArgs& args) {
  Config cfg = load_config(args);
  TruncationConfig tc;
  tc.kind = parse_kind(cfg.get_string("experiment", "axis_aligned"));
  tc.sol = soliton_params(tc.kind, cfg.get_double("a", 0.01), cfg.get_double("c", 0.1),
                          cfg.get_double("phi_u", 0.0), cfg.get_double("phi_v", 0.0));
  tc.lower = cfg.get_double("L0", -20.0);
  tc.upper = cfg.get_double("L1", 25.0);
  tc.params = make_scheme_params(cfg.get_double("sigma1", 1.0), cfg.get_double("sigma2", 1.0),
                                 cfg.get_double("lambda", 1.0), cfg.get_double("p", 2.5),
                                 cfg.get_double("mu1", 0.25), cfg.get_double("mu2", 0.5),
                                 cfg.get_double("mu3", 0.25), cfg.get_int("kappa", 2));
  const std::string regime = cfg.get_string("regime", "space");
  if (regime == "space")
    tc.regime = TruncationRegime::space;
  else if (regime == "time")
    tc.regime = TruncationRegime::time;
  else
    throw ConfigError("unknown regime '" + regime + "'");
  tc.ladder_j = cfg.get_int_list("ladder_J", {15, 31, 63});
  tc.l_over_h = cfg.get_double("l_over_h", 1.0);
  tc.j_fixed = cfg.get_int("J", 63);
  tc.ladder_l = cfg.get_double_list("ladder_l", {4.0, 2.0, 1.0});
  tc.t_eval = cfg.get_double("t_eval", 0.5);
  tc.margin = cfg.get_int("margin", 2);

  TruncationResult res = truncation_order_study(tc);

  // Reuse the results schema: the measured defect goes in the Er column and
  // its amplitude-normalized value in RelEr.
  std::vector<ResultRow> rows;
  for (size_t k = 0; k < res.levels.size(); ++k) {
    const TruncationLevel& lev = res.levels[k];
    SpatialGrid g = build_grid(tc.lower, tc.upper, lev.J);
    StatePair exact = exact_fields(tc.kind, tc.sol, g, tc.t_eval);
    double amp = std::max(exact.u.cwiseAbs().maxCoeff(), exact.v.cwiseAbs().maxCoeff());
    ResultRow row;
    row.experiment = kind_name(tc.kind);
    row.J = lev.J;
    row.h = lev.h;
    row.l = lev.l;
    row.mu1 = tc.params.mu1;
    row.mu2 = tc.params.mu2;
    row.mu3 = tc.params.mu3;
    row.kappa = tc.params.kappa;
    row.er = lev.residual;
    row.rel_er = lev.residual / amp;
    if (k > 0) row.observed_order = res.observed_orders[k - 1];
    rows.push_back(std::move(row));
  }
  write_text_file(fs::path(args.out_dir) / "truncation.csv", emit_results(rows));

  std::cout << "truncation (" << regime << "): residuals =";
  for (const TruncationLevel& lev : res.levels) std::cout << ' ' << format_double(lev.residual);
  std::cout << ", observed orders =";
  for (double o : res.observed_orders) std::cout << ' ' << format_double(o);
  std::cout << "\n";
  return 0;
}

int cmd_oracle(const CommonArgs& args) {
  Config cfg = load_config(args);
  SchemeParams params = make_scheme_params(
      cfg.get_double("sigma1", 1.0), cfg.get_double("sigma2", 1.0), cfg.get_double("lambda", 1.0),
      cfg.get_double("p", 2.5), cfg.get_double("mu1", 0.25), cfg.get_double("mu2", 0.5),
      cfg.get_double("mu3", 0.25), cfg.get_int("kappa", 2));
  std::vector<double> probes =
      probe_line(cfg.get_double("oracle_lo", -25.0), cfg.get_double("oracle_hi", 30.0),
                 cfg.get_int("oracle_points", 23));
  const double t = cfg.get_double("t_eval", 0.4);
  const double fd_step = cfg.get_double("fd_step", 1e-4);

  std::vector<ExperimentKind> kinds;
  if (cfg.has("experiment"))
    kinds = {parse_kind(cfg.get_string("experiment", ""))};
  else
    kinds = {ExperimentKind::counter_propagating, ExperimentKind::axis_aligned};

  std::string table = "experiment,a,c,omega,amp_u,amp_v,t,fd_step,max_residual_u,max_residual_v\n";
  for (ExperimentKind kind : kinds) {
    SolitonParams sol = soliton_params(kind, cfg.get_double("a", 0.01), cfg.get_double("c", 0.1),
                                       cfg.get_double("phi_u", 0.0), cfg.get_double("phi_v", 0.0));
    OracleReport rep = residual_oracle(kind, sol, params, probes, probes, t, fd_step);
    std::cout << "oracle: " << kind_name(kind)
              << " max residual u=" << format_double(rep.max_residual_u)
              << " v=" << format_double(rep.max_residual_v) << "\n";
    table += kind_name(kind);
    for (double x : {sol.a, sol.c, sol.omega, sol.amp_u, sol.amp_v, t, fd_step,
                     rep.max_residual_u, rep.max_residual_v}) {
      table += ',';
      table += format_double(x);
    }
    table += '\n';
  }
  write_text_file(fs::path(args.out_dir) / "oracle.csv", table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-component Schrodinger solver on Lyapunov steps"};
  app.require_subcommand(1);

  CommonArgs run_args, conv_args, trunc_args, oracle_args;

  CLI::App* run_cmd = app.add_subcommand("run", "march one configuration");
  run_cmd->add_option("--config", run_args.config_path, "configuration file");
  run_cmd->add_option("--out", run_args.out_dir, "output directory");
  run_cmd->add_option("--snapshots", run_args.snapshots, "snapshot cadence (0 = final only)");

  CLI::App* conv_cmd = app.add_subcommand("convergence", "mesh ladder error study");
  conv_cmd->add_option("--config", conv_args.config_path, "configuration file");
  conv_cmd->add_option("--out", conv_args.out_dir, "output directory");

  CLI::App* trunc_cmd = app.add_subcommand("truncation", "local truncation order study");
  trunc_cmd->add_option("--config", trunc_args.config_path, "configuration file");
  trunc_cmd->add_option("--out", trunc_args.out_dir, "output directory");

  CLI::App* oracle_cmd = app.add_subcommand("oracle", "certify manufactured forcing terms");
  oracle_cmd->add_option("--config", oracle_args.config_path, "configuration file");
  oracle_cmd->add_option("--out", oracle_args.out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run_args);
    if (conv_cmd->parsed()) return cmd_convergence(conv_args);
    if (trunc_cmd->parsed()) return cmd_truncation(trunc_args);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
