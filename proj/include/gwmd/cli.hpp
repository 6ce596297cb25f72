#pragma once

// Command-line front end.
//
// Exactly one subcommand runs per invocation:
//   simulate, pgf, bound, qlimit, check (bernstein|mgf|linnik|moment),
//   estimate, ci (window|single), tail-ratio, mdp, coverage, smallpop.
//
// Reports go to --output, else to $GWMD_OUT_DIR/<subcommand>.<ext>, else to
// stdout; a one-paragraph summary always goes to stderr. Exit codes:
//   0  success
//   2  usage / flag parse error
//   3  domain error (invalid law, overflow, bad input file)
//   4  --strict and some grid point or sweep entry is statistically
//      unreliable
//
// All randomness flows from --seed; without the flag a seed is drawn from OS
// entropy and recorded in the report.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gwmd/branching.hpp"
#include "gwmd/errors.hpp"
#include "gwmd/experiments.hpp"
#include "gwmd/inference.hpp"
#include "gwmd/io.hpp"
#include "gwmd/offspring.hpp"
#include "gwmd/stats.hpp"

namespace gwmd::cli {

namespace detail {

struct OutputOpts {
  std::string path;          // --output
  std::string format = "csv";
  bool strict = false;
};

inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
}

template <class WriteFn>
void emit(const OutputOpts& opts, const std::string& default_stem, WriteFn&& write) {
  std::string path = opts.path;
  if (path.empty()) {
    if (const char* dir = std::getenv("GWMD_OUT_DIR")) {
      path = std::string(dir) + "/" + default_stem + "." + opts.format;
    }
  }
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot open output file '" + path + "'");
  write(os);
  std::cerr << "wrote " << path << "\n";
}

template <class Report>
void emit_report(const OutputOpts& opts, const std::string& stem, const Report& rep) {
  emit(opts, stem, [&](std::ostream& os) {
    if (opts.format == "json") {
      os << to_json(rep).dump(2) << "\n";
    } else {
      write_csv(rep, os);
    }
  });
}

inline Trajectory load_trajectory(const std::string& path) {
  if (path == "-") return read_trajectory_csv(std::cin);
  std::ifstream is(path);
  if (!is) throw DomainError("cannot open trajectory file '" + path + "'");
  return read_trajectory_csv(is);
}

inline WidthMode parse_width_mode(const std::string& s) {
  if (s == "derived") return WidthMode::derived;
  if (s == "literal") {
    return WidthMode::literal;
  }
  throw DomainError("width mode must be 'derived' or 'literal'");
}

inline Statistic parse_statistic(const std::string& s) {
  if (s == "H" || s == "h") return Statistic::window_h;
  if (s == "R" || s == "r") return Statistic::single_step_r;
  throw DomainError("statistic must be 'H' or 'R'");
}

inline std::vector<double> default_x_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(0.25 * i);
  return g;
}

}  // namespace detail

inline int run(int argc, const char* const* argv) {
  CLI::App app{"Supercritical Galton-Watson simulation, ratio estimators and "
               "Monte Carlo tail/coverage experiments"};
  app.require_subcommand(1);
  int rc = 0;

  // Shared option state. Only the options registered on the selected
  // subcommand are ever read.
  std::string law_spec;
  std::string traj_path;
  std::string stat_name = "H";
  std::string method_name;
  std::string width_mode_name = "derived";
  detail::OutputOpts out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::size_t n0 = 0, n = 1, n_max = 20;
  std::uint64_t z_init = 1, replicates = 10'000;
  std::uint64_t zn = 0, znext = 0;
  double s_arg = 0.5, kappa = 0.05, v_arg = 0.0, m_arg = 0.0;
  double c_arg = 0.0, kappa0 = 0.0, iota0 = 0.0, tau = 1.0 / 6.0, rho = 1.0;
  double a_exponent = 0.25, x0 = 1.0;
  int lmax = 30;
  bool fast = false;
  std::vector<double> x_grid = detail::default_x_grid();
  std::vector<std::size_t> n_sweep;

  const auto add_output = [&](CLI::App* sub, bool with_strict = false) {
    sub->add_option("-o,--output", out.path, "output path ('-' = stdout)");
    sub->add_option("--format", out.format, "report format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    if (with_strict) {
      sub->add_flag("--strict", out.strict,
                    "exit 4 if any grid point is statistically unreliable");
    }
  };
  const auto add_seed_threads = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "master seed (default: OS entropy, recorded in report)");
    sub->add_option("--threads", threads, "worker threads (0 = auto)");
  };

  // --- simulate ---------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "simulate one trajectory window");
  sim->add_option("--law", law_spec, "offspring law spec")->required();
  sim->add_option("--n", n, "window length (transitions)")->required();
  sim->add_option("--n0", n0, "first recorded generation (burn-in length)");
  sim->add_option("--z-init", z_init, "initial population Z_0");
  sim->add_flag("--fast", fast, "poisson1 only: O(1)-per-generation shortcut");
  sim->add_option("--seed", seed, "seed (default: OS entropy, recorded in output)");
  sim->add_option("-o,--output", out.path, "output path ('-' = stdout)");
  sim->callback([&] {
    const OffspringLaw law = parse_law(law_spec);
    const std::uint64_t used_seed = detail::resolve_seed(seed);
    Rng rng(used_seed);
    const Trajectory traj = fast ? simulate_fast(law, n0, n, rng, z_init)
                                 : simulate(law, n0, n, rng, z_init);
    out.format = "csv";
    detail::emit(out, "trajectory", [&](std::ostream& os) {
      os << "# seed: " << used_seed << "\n";
      write_trajectory_csv(traj, os);
    });
    std::cerr << "simulated generations " << traj.n0 << ".." << traj.n0 + n << " of "
              << traj.law_tag << " from Z_0=" << z_init << " (seed " << used_seed
              << "); Z_" << traj.n0 + n << " = " << traj.values.back() << "\n";
  });

  // --- pgf ----------------------------------------------------------------
  auto* pgf = app.add_subcommand("pgf", "evaluate the iterated generating function f_n(s)");
  pgf->add_option("--law", law_spec)->required();
  pgf->add_option("--s", s_arg, "point in [0,1]")->required();
  pgf->add_option("--n", n, "iteration count")->required();
  add_output(pgf);
  pgf->callback([&] {
    const OffspringLaw law = parse_law(law_spec);
    const double value = pgf_iterate(law, s_arg, n);
    detail::emit(out, "pgf", [&](std::ostream& os) {
      if (out.format == "json") {
        json j{{"law", format_law(law)}, {"s", s_arg}, {"n", n}, {"value", value}};
        os << j.dump(2) << "\n";
      } else {
        os << "s,n,value\n"
           << format_number(s_arg) << "," << n << "," << format_number(value) << "\n";
      }
    });
    std::cerr << "f_" << n << "(" << s_arg << ") = " << format_number(value) << " for "
              << format_law(law) << "\n";
  });

  // --- bound --------------------------------------------------------------
  auto* bound = app.add_subcommand("bound", "Markov upper bound on P(Z_n <= n)");
  bound->add_option("--law", law_spec)->required();
  bound->add_option("--n", n)->required();
  add_output(bound);
  bound->callback([&] {
    const OffspringLaw law = parse_law(law_spec);
    const double b = small_pop_bound(law, n);
    const double s0 = 0.5 * (1.0 + law.p1());
    detail::emit(out, "bound", [&](std::ostream& os) {
      if (out.format == "json") {
        json j{{"law", format_law(law)}, {"n", n}, {"s0", s0}, {"bound", b}};
        os << j.dump(2) << "\n";
      } else {
        os << "n,s0,bound\n" << n << "," << format_number(s0) << "," << format_number(b) << "\n";
      }
    });
    std::cerr << "P(Z_" << n << " <= " << n << ") <= " << format_number(b) << " for "
              << format_law(law) << "\n";
  });

  // --- qlimit ---------------------------------------------------------------
  auto* qlimit = app.add_subcommand("qlimit", "sequence f_n(s)/p1^n witnessing the Q(s) limit");
  qlimit->add_option("--law", law_spec)->required();
  qlimit->add_option("--s", s_arg, "point in [0,1)")->required();
  qlimit->add_option("--n-max", n_max, "last n of the sequence")->capture_default_str();
  add_output(qlimit);
  qlimit->callback([&] {
    const OffspringLaw law = parse_law(law_spec);
    const std::vector<double> seq = q_limit_estimate(law, s_arg, n_max);
    detail::emit(out, "qlimit", [&](std::ostream& os) {
      if (out.format == "json") {
        json j{{"law", format_law(law)}, {"s", s_arg}, {"sequence", seq}};
        os << j.dump(2) << "\n";
      } else {
        os << "n,ratio\n";
        for (std::size_t i = 0; i < seq.size(); ++i) {
          os << i + 1 << "," << format_number(seq[i]) << "\n";
        }
      }
    });
    std::cerr << "f_n(" << s_arg << ")/p1^n for n=1.." << n_max << ", last value "
              << format_number(seq.back()) << "\n";
  });

  // --- check ---------------------------------------------------------------
  auto* check = app.add_subcommand("check", "moment / exponential-moment condition checkers");
  check->require_subcommand(1);
  auto* ck_bern = check->add_subcommand("bernstein", "E|Z_1-m|^l <= (1/2) l! (l-1)^{-l/2} c^{l-2} v^2");
  ck_bern->add_option("--law", law_spec)->required();
  ck_bern->add_option("--c", c_arg, "Bernstein constant c")->required();
  ck_bern->add_option("--lmax", lmax, "largest order scanned")->capture_default_str();
  add_output(ck_bern);
  auto* ck_mgf = check->add_subcommand("mgf", "E exp(kappa0 Z_1) finite?");
  ck_mgf->add_option("--law", law_spec)->required();
  ck_mgf->add_option("--kappa0", kappa0)->required();
  add_output(ck_mgf);
  auto* ck_linnik = check->add_subcommand("linnik", "E exp(iota0 Z_1^{4tau/(2tau+1)}) finite?");
  ck_linnik->add_option("--law", law_spec)->required();
  ck_linnik->add_option("--iota0", iota0)->required();
  ck_linnik->add_option("--tau", tau, "tau in (0, 1/6]")->capture_default_str();
  add_output(ck_linnik);
  auto* ck_moment = check->add_subcommand("moment", "E Z_1^{2+rho}");
  ck_moment->add_option("--law", law_spec)->required();
  ck_moment->add_option("--rho", rho, "rho in (0,1]")->capture_default_str();
  add_output(ck_moment);
  check->callback([&] {
    const OffspringLaw law = parse_law(law_spec);
    ConditionReport rep;
    if (check->got_subcommand(ck_bern)) {
      rep = check_bernstein(law, c_arg, lmax);
    } else if (check->got_subcommand(ck_mgf)) {
      rep = check_cramer_mgf(law, kappa0);
    } else if (check->got_subcommand(ck_linnik)) {
      rep = check_linnik(law, iota0, tau);
    } else {
      rep.condition = ConditionName::moment_2_rho;
      rep.parameters = {{"rho", rho}};
      rep.value = moment_2_rho(law, rho);
      rep.passed = true;
      rep.scan_limit = gwmd::detail::kSeriesTermCap;
    }
    detail::emit_report(out, "check", rep);
    std::cerr << "condition " << to_string(rep.condition) << " on " << format_law(law)
              << ": " << (rep.passed ? "passed" : (rep.divergent ? "divergent" : "failed"));
    if (rep.value) std::cerr << ", value " << format_number(*rep.value);
    std::cerr << "\n";
  });

  // --- estimate ---------------------------------------------------------------
  auto* est = app.add_subcommand("estimate", "m_hat, H and R from a trajectory CSV");
  est->add_option("--traj", traj_path, "trajectory CSV path ('-' = stdin)")->required();
  est->add_option("--m", m_arg, "true offspring mean")->required();
  est->add_option("--v", v_arg, "true offspring standard deviation")->required();
  add_output(est);
  est->callback([&] {
    const Trajectory traj = detail::load_trajectory(traj_path);
    const WindowStat ws = h_statistic(traj, m_arg, v_arg);
    const std::size_t last = traj.values.size() - 1;
    const double r_last =
        r_statistic(traj.values[last - 1], traj.values[last], m_arg, v_arg);
    detail::emit(out, "estimate", [&](std::ostream& os) {
      if (out.format == "json") {
        json j{{"n0", ws.n0},       {"n", ws.n},
               {"m", m_arg},        {"v", v_arg},
               {"m_hat", ws.m_hat}, {"h", ws.h_value},
               {"sqrt_sum", ws.sqrt_sum}, {"r_last", r_last}};
        os << j.dump(2) << "\n";
      } else {
        os << "n0,n,m,v,m_hat,h,sqrt_sum,r_last\n";
        os << ws.n0 << "," << ws.n << "," << format_number(m_arg) << ","
           << format_number(v_arg) << "," << format_number(ws.m_hat) << ","
           << format_number(ws.h_value) << "," << format_number(ws.sqrt_sum) << ","
           << format_number(r_last) << "\n";
      }
    });
    std::cerr << "window n=" << ws.n << " starting at generation " << ws.n0
              << ": m_hat = " << format_number(ws.m_hat)
              << ", H = " << format_number(ws.h_value)
              << ", last-transition R = " << format_number(r_last) << "\n";
  });

  // --- ci ---------------------------------------------------------------
  auto* ci = app.add_subcommand("ci", "confidence intervals for the offspring mean");
  ci->require_subcommand(1);
  auto* ci_win = ci->add_subcommand("window", "window interval from the weighted estimator");
  ci_win->add_option("--traj", traj_path)->required();
  ci_win->add_option("--v", v_arg, "true offspring standard deviation")->required();
  ci_win->add_option("--kappa", kappa, "miss probability")->capture_default_str();
  add_output(ci_win);
  auto* ci_sgl = ci->add_subcommand("single", "single-transition interval");
  ci_sgl->add_option("--zn", zn, "Z_n")->required();
  ci_sgl->add_option("--znext", znext, "Z_{n+1}")->required();
  ci_sgl->add_option("--v", v_arg)->required();
  ci_sgl->add_option("--kappa", kappa)->capture_default_str();
  ci_sgl->add_option("--width-mode", width_mode_name, "derived | literal")
      ->capture_default_str();
  ci_sgl->add_option("--tau", tau,
                     "emit the |ln kappa| = o(n^{2 tau}) diagnostic for this tau");
  ci_sgl->add_option("--n", n, "generation index for the kappa diagnostic");
  add_output(ci_sgl);
  ci->callback([&] {
    ConfidenceInterval interval{0, 0, 0, CiMethod::window, std::nullopt, 0};
    CLI::App* active = ci_win;
    std::optional<KappaDiagnostic> diag;
    if (ci->got_subcommand(ci_win)) {
      const Trajectory traj = detail::load_trajectory(traj_path);
      interval = ci_window(traj, v_arg, kappa);
      diag = validate_kappa(kappa, traj.transitions(), KappaRegime::window);
    } else {
      active = ci_sgl;
      interval = ci_single(zn, znext, v_arg, kappa, detail::parse_width_mode(width_mode_name));
      if (ci_sgl->count("--tau") != 0 && ci_sgl->count("--n") != 0) {
        diag = validate_kappa(kappa, n, KappaRegime::single, tau);
      }
    }
    // Interval reports are JSON unless csv was asked for explicitly.
    if (active->count("--format") == 0) out.format = "json";
    detail::emit_report(out, "ci", interval);
    std::cerr << "level " << format_number(interval.level) << " "
              << to_string(interval.method) << " interval ["
              << format_number(interval.lo) << ", " << format_number(interval.hi) << "]\n";
    if (diag) {
      std::cerr << "kappa diagnostic (advisory): |ln kappa| = "
                << format_number(diag->abs_log_kappa) << " vs scale "
                << format_number(diag->scale) << ", ratio " << format_number(diag->ratio)
                << (diag->warn ? " (asymptotic smallness condition looks violated)" : "")
                << "\n";
    }
  });

  // --- tail-ratio ---------------------------------------------------------
  auto* tr = app.add_subcommand("tail-ratio",
                                "empirical tail / normal tail ratios of H or R");
  tr->add_option("--law", law_spec)->required();
  tr->add_option("--stat", stat_name, "H | R")->capture_default_str();
  tr->add_option("--n0", n0);
  tr->add_option("--n", n, "window length / target generation")->required();
  tr->add_option("--N", replicates, "replicates")->required();
  tr->add_option("--x-grid", x_grid, "ascending grid of x values")
      ->delimiter(',')
      ->capture_default_str();
  add_seed_threads(tr);
  add_output(tr, true);
  tr->callback([&] {
    ExperimentConfig cfg(parse_law(law_spec));
    cfg.statistic = detail::parse_statistic(stat_name);
    cfg.n0 = n0;
    cfg.n = n;
    cfg.replicates = replicates;
    cfg.x_grid = x_grid;
    cfg.master_seed = detail::resolve_seed(seed);
    cfg.threads = threads;
    const TailRatioReport rep = tail_ratio_experiment(cfg);
    detail::emit_report(out, "tail-ratio", rep);
    double worst = 0.0;
    for (const auto& r : rep.upper) {
      if (r.reliable && std::fabs(r.ratio - 1.0) > worst) worst = std::fabs(r.ratio - 1.0);
    }
    for (const auto& r : rep.lower) {
      if (r.reliable && std::fabs(r.ratio - 1.0) > worst) worst = std::fabs(r.ratio - 1.0);
    }
    std::cerr << "tail-ratio " << to_string(cfg.statistic) << " on " << rep.law
              << ", n=" << n << ", N=" << replicates << " (seed " << cfg.master_seed
              << "): worst reliable |ratio-1| = " << format_number(worst)
              << (rep.any_unreliable() ? "; some grid points unreliable (count < 10)" : "")
              << "\n";
    if (out.strict && rep.any_unreliable()) rc = 4;
  });

  // --- mdp ---------------------------------------------------------------
  auto* mdp = app.add_subcommand("mdp", "empirical moderate-deviation rate over an n sweep");
  mdp->add_option("--law", law_spec)->required();
  mdp->add_option("--stat", stat_name, "H | R")->capture_default_str();
  mdp->add_option("--n0", n0);
  mdp->add_option("--a-exponent", a_exponent, "a_n = n^a, a in (0, 1/2)")
      ->capture_default_str();
  mdp->add_option("--x0", x0, "rate point; B = {|x| >= x0}")->capture_default_str();
  mdp->add_option("--n-sweep", n_sweep, "window lengths")->delimiter(',')->required();
  mdp->add_option("--N", replicates)->required();
  add_seed_threads(mdp);
  add_output(mdp, true);
  mdp->callback([&] {
    ExperimentConfig cfg(parse_law(law_spec));
    cfg.statistic = detail::parse_statistic(stat_name);
    cfg.n0 = n0;
    cfg.replicates = replicates;
    cfg.a_exponent = a_exponent;
    cfg.master_seed = detail::resolve_seed(seed);
    cfg.threads = threads;
    const MdpReport rep = mdp_experiment(cfg, x0, n_sweep);
    detail::emit_report(out, "mdp", rep);
    std::cerr << "mdp " << to_string(cfg.statistic) << " on " << rep.law << ", a_n=n^"
              << a_exponent << ", x0=" << x0 << ", N=" << replicates << " (seed "
              << cfg.master_seed << "): final gap "
              << format_number(rep.rows.back().gap) << " against target "
              << format_number(rep.rows.back().target) << "\n";
    if (out.strict && rep.any_unestimable()) rc = 4;
  });

  // --- coverage ------------------------------------------------------------
  auto* cov = app.add_subcommand("coverage", "empirical confidence-interval coverage");
  cov->add_option("--method", method_name, "window | single")
      ->required()
      ->check(CLI::IsMember({"window", "single"}));
  cov->add_option("--law", law_spec)->required();
  cov->add_option("--n0", n0);
  cov->add_option("--n", n)->required();
  cov->add_option("--N", replicates)->required();
  cov->add_option("--kappa", kappa)->capture_default_str();
  cov->add_option("--width-mode", width_mode_name, "derived | literal (single only)")
      ->capture_default_str();
  add_seed_threads(cov);
  add_output(cov);
  cov->callback([&] {
    ExperimentConfig cfg(parse_law(law_spec));
    cfg.n0 = n0;
    cfg.n = n;
    cfg.replicates = replicates;
    cfg.kappa = kappa;
    cfg.master_seed = detail::resolve_seed(seed);
    cfg.threads = threads;
    const CiMethod method =
        method_name == "window" ? CiMethod::window : CiMethod::single_step;
    const CoverageReport rep =
        coverage_experiment(cfg, method, detail::parse_width_mode(width_mode_name));
    detail::emit_report(out, "coverage", rep);
    std::cerr << "coverage " << method_name << " on " << rep.law << ", n=" << n
              << ", kappa=" << kappa << ", N=" << replicates << " (seed "
              << cfg.master_seed << "): " << format_number(rep.coverage) << " vs nominal "
              << format_number(rep.nominal) << ", band [" << format_number(rep.band_lo)
              << ", " << format_number(rep.band_hi) << "]\n";
  });

  // --- smallpop ---------------------------------------------------------
  auto* sp = app.add_subcommand("smallpop",
                                "empirical P(Z_n <= n) against the analytic bound");
  sp->add_option("--law", law_spec)->required();
  sp->add_option("--n-sweep", n_sweep)->delimiter(',')->required();
  sp->add_option("--N", replicates)->required();
  add_seed_threads(sp);
  add_output(sp);
  sp->callback([&] {
    const OffspringLaw law = parse_law(law_spec);
    const std::uint64_t used_seed = detail::resolve_seed(seed);
    const SmallPopReport rep =
        small_pop_experiment(law, n_sweep, replicates, used_seed, threads);
    detail::emit_report(out, "smallpop", rep);
    std::cerr << "smallpop on " << rep.law << ", N=" << replicates << " (seed " << used_seed
              << "): " << (rep.all_ok() ? "all" : "NOT all")
              << " frequencies within bound + 3 se\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return rc;
}

/// Test-friendly entry point; args excludes the program name.
inline int run(const std::vector<std::string>& args) {
  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("gwmd");
  for (const auto& a : args) argv_store.push_back(a);
  std::vector<const char*> argv;
  argv.reserve(argv_store.size());
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace gwmd::cli
