#include "billiards/commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "billiards/config.hpp"
#include "billiards/outputs.hpp"
#include "billiards/sweep.hpp"

namespace billiards {
namespace {

std::string e12(double x) { return fmt::format("{:.12e}", x); }

std::filesystem::path out_dir(const LabConfig& cfg, const CommandOptions& opt) {
  return opt.out ? *opt.out : cfg.output_dir;
}

// Words selected by the flags: --word, else a sampled word when --seed is
// given, else the config list.
std::vector<WordSpec> selected_words(const LabConfig& cfg,
                                     const CommandOptions& opt) {
  if (opt.word) {
    std::vector<Word> w = expand_word_spec(*opt.word, cfg.family.size());
    if (w.size() != 1) throw config_error("--word must name a single word");
    return {{"cli", w.front()}};
  }
  if (opt.seed) {
    const std::size_t len = opt.m.value_or(80);
    return {{"cli", sample_itinerary(cfg.family.size(), len, *opt.seed)}};
  }
  return cfg.words;
}

double selected_alpha(const LabConfig& cfg, const CommandOptions& opt) {
  const double a = opt.alpha.value_or(cfg.alpha_grid.start);
  if (!(a >= 0.0 && a <= cfg.family.alpha_max()))
    throw config_error(fmt::format("--alpha {} outside [0, {}]", a,
                                   cfg.family.alpha_max()));
  return a;
}

TableBounds bounds_at(const LabConfig& cfg, double alpha,
                      const std::vector<WordSpec>& words, Execution exec) {
  std::vector<Word> extra;
  for (const auto& w : words) extra.push_back(w.word);
  return table_bounds(cfg.family, alpha, cfg.validation_u_points, cfg.phi_max,
                      cfg.phi_sampling(extra), exec);
}

int cmd_check(const LabConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const std::vector<double> alphas = cfg.alpha_grid.values();
  std::vector<TableBounds> bounds = grid_bounds(cfg, alphas, opt.exec);
  fmt::print(out, "config {}: {} obstacles, {} mode, alpha in [0, {}]\n",
             cfg.name, cfg.family.size(),
             cfg.family.period_two_mode() ? "period-2" : "multi-word",
             cfg.family.alpha_max());
  fmt::print(out, "{:>12} {:>10} {:>10} {:>10} {:>8} {:>8} {:>8} {:>8} {:>10} "
                  "{:>10} {:>10} {:>5}\n",
             "alpha", "d_min", "d_max", "d_orbit", "kap_min", "kap_max",
             "phi_max", "k_min", "k_max", "lower", "upper", "(H)");
  std::string cert = "alpha,holds,i,j,k\n";
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const TableBounds& b = bounds[i];
    const auto [lo, hi] = lyapunov_bounds(b);
    const NoEclipseCertificate c =
        check_no_eclipse(cfg.family, alphas[i], 256, 0.0, opt.exec);
    fmt::print(out, "{:12.6f} {:10.6f} {:10.6f} {:10.6f} {:8.4f} {:8.4f} {:8.5f} "
                    "{:8.4f} {:10.6f} {:10.6f} {:10.6f} {:>5}\n",
               alphas[i], b.d_min, b.d_max, b.d_max_orbit, b.kappa_min,
               b.kappa_max, b.phi_max, b.k_min, b.k_max, lo, hi,
               c.holds ? "yes" : "NO");
    cert += c.witness ? fmt::format("{},0,{},{},{}\n", e12(alphas[i]),
                                    c.witness->i + 1, c.witness->j + 1,
                                    c.witness->k + 1)
                      : fmt::format("{},1,,,\n", e12(alphas[i]));
  }
  const TableBounds& b0 = bounds.front();
  fmt::print(out,
             "a-priori exponent bounds at alpha = {}: [{:.9f}, {:.9f}] "
             "(with orbit d_max {:.6f}: upper {:.9f})\n",
             alphas.front(), lyapunov_bounds(b0).first,
             lyapunov_bounds(b0).second, b0.d_max_orbit,
             std::log1p(b0.d_max_orbit * b0.k_max));
  const auto dir = out_dir(cfg, opt);
  write_file(dir / "bounds.csv", bounds_csv(alphas, bounds));
  write_file(dir / "certificates.csv", cert);
  fmt::print(out, "wrote {}\n", (dir / "bounds.csv").string());
  return 0;
}

int cmd_orbit(const LabConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const double alpha = selected_alpha(cfg, opt);
  std::string csv = "word_id,j,obstacle,u,x,y,d,phi,kappa\n";
  for (const auto& w : selected_words(cfg, opt)) {
    const BilliardOrbit o = solve_word(w.word, cfg, alpha);
    const bool round_trip = read_itinerary(o).symbols == w.word.symbols;
    fmt::print(out, "{} [{}] {} at alpha = {}: residual {:.2e}, {} iterations, "
                    "itinerary {}\n",
               w.id, format_word(w.word), o.kind == OrbitKind::periodic
                                              ? "periodic" : "segment",
               alpha, o.residual, o.iterations,
               round_trip ? "reproduced" : "MISMATCH");
    fmt::print(out, "{:>4} {:>4} {:>12} {:>12} {:>12} {:>12} {:>10} {:>8}\n", "j",
               "obs", "u", "x", "y", "d", "phi", "kappa");
    for (std::size_t j = 0; j < o.records.size(); ++j) {
      const auto& r = o.records[j];
      fmt::print(out, "{:4} {:4} {:12.8f} {:12.8f} {:12.8f} {:12.8f} {:10.7f} {:8.5f}\n",
                 j, r.obstacle + 1, r.u, r.point.x(), r.point.y(),
                 r.d ? *r.d : std::nan(""), r.phi, r.kappa);
      csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", w.id, j, r.obstacle + 1,
                         e12(r.u), e12(r.point.x()), e12(r.point.y()),
                         r.d ? e12(*r.d) : std::string(), e12(r.phi), e12(r.kappa));
    }
  }
  write_file(out_dir(cfg, opt) / "orbit.csv", csv);
  return 0;
}

int cmd_lyapunov(const LabConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const double alpha = selected_alpha(cfg, opt);
  const auto words = selected_words(cfg, opt);
  const TableBounds tb = bounds_at(cfg, alpha, words, opt.exec);
  std::string csv =
      "word_id,alpha,kind,m,burn_in,lambda_m,lower,upper,seed_sensitivity,"
      "lambda_oracle\n";
  for (const auto& w : words) {
    const BilliardOrbit o = solve_word(w.word, cfg, alpha);
    const std::size_t steps = o.kind == OrbitKind::periodic ? opt.m.value_or(0) : 0;
    LyapunovReport rep = lyapunov_estimate(o, tb, {}, cfg.burn_in, steps);
    if (opt.oracle)
      rep.oracle_lambda = jacobian_lyapunov_oracle(o, cfg.family, 1e-6, {}, cfg.burn_in);
    fmt::print(out, "{} [{}] alpha = {}\n", w.id, format_word(w.word), alpha);
    fmt::print(out, "  lambda_m = {:.12f}  (m = {}, burn-in {}, k0 = {:.9f})\n",
               rep.lambda_m, rep.m, rep.burn_in, rep.k0);
    fmt::print(out, "  bounds   = [{:.9f}, {:.9f}]  {}\n", rep.lower_bound,
               rep.upper_bound,
               rep.lambda_m >= rep.lower_bound && rep.lambda_m <= rep.upper_bound
                   ? "inside" : "OUTSIDE");
    fmt::print(out, "  seed sensitivity (k_min vs k_max) = {:.3e}\n",
               rep.seed_sensitivity);
    if (rep.oracle_lambda)
      fmt::print(out, "  oracle   = {:.12f}  (difference {:.3e})\n",
                 *rep.oracle_lambda, *rep.oracle_lambda - rep.lambda_m);
    fmt::print(out, "  convergence:");
    for (auto [len, lam] : rep.convergence) fmt::print(out, " m={}:{:.9f}", len, lam);
    fmt::print(out, "\n");
    csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", w.id, e12(alpha),
                       o.kind == OrbitKind::periodic ? "periodic" : "segment",
                       rep.m, rep.burn_in, e12(rep.lambda_m), e12(rep.lower_bound),
                       e12(rep.upper_bound), e12(rep.seed_sensitivity),
                       rep.oracle_lambda ? e12(*rep.oracle_lambda) : std::string());
  }
  write_file(out_dir(cfg, opt) / "lyapunov.csv", csv);
  return 0;
}

int cmd_sweep(const LabConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const SweepResult res = run_sweep(cfg, opt.exec);
  const auto dir = out_dir(cfg, opt);
  emit_outputs(res, cfg.words, dir);
  const ContinuitySummary& s = res.summary;
  fmt::print(out, "sweep {}: {} words x {} alpha values, {} rows, {} failed\n",
             cfg.name, cfg.words.size(), res.alphas.size(), res.rows.size(),
             res.failures.size());
  for (const auto& f : res.failures)
    fmt::print(out, "  failed {} at alpha = {}: {}\n", f.word_id, f.alpha, f.reason);
  fmt::print(out, "grid constants: d_min {:.6f}, d_max {:.6f}, k_min {:.6f}, k_max {:.6f}, C0 {:.6f}\n",
             s.d_min, s.d_max, s.k_min, s.k_max, s.C0);
  fmt::print(out, "observed constants: C_d {:.6e}, C_k {:.6e}, C_u {:.6e}, C_1 {:.6e}\n",
             s.C_d_obs, s.C_k_obs, s.C_u_obs, s.C1_obs);
  fmt::print(out, "continuity modulus: {} rows checked, {} violations, worst lhs/rhs {:.4f}\n",
             s.rows_checked, s.violations, s.worst_ratio);
  fmt::print(out, "wrote {}\n", (dir / "sweep.csv").string());
  return 0;
}

int cmd_derivative(const LabConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  require_differentiable(cfg);
  const auto words = selected_words(cfg, opt);
  const TableBounds tb0 = bounds_at(cfg, 0.0, words, opt.exec);
  std::string csv = "word_id,alpha,lambda,fd_slope,F_m,error,bound\n";
  for (const auto& w : words) {
    const DerivativeReport r = run_derivative(cfg, w, tb0);
    fmt::print(out, "{} [{}]: m = {}, lambda(0) = {:.12f}, F_m = {:.12f}\n", w.id,
               format_word(w.word), r.m, r.lambda0, r.F_m);
    fmt::print(out, "  observed C1 = {:.6e}, C2 = {:.6e}; |F_m| <= {:.6e} {}\n",
               r.C1_obs, r.C2_obs, r.F_bound, r.bound_ok ? "ok" : "VIOLATED");
    fmt::print(out, "  {:>12} {:>18} {:>12} {:>12} {:>6}\n", "alpha", "fd_slope",
               "|fd - F|", "C2/2 alpha", "");
    for (const auto& row : r.rows) {
      fmt::print(out, "  {:12.6e} {:18.12f} {:12.4e} {:12.4e} {:>6}\n", row.alpha,
                 row.fd_slope, row.error, row.bound,
                 row.error <= row.bound + 1e-12 ? "ok" : "FAIL");
      csv += fmt::format("{},{},{},{},{},{},{}\n", w.id, e12(row.alpha),
                         e12(row.lambda), e12(row.fd_slope), e12(r.F_m),
                         e12(row.error), e12(row.bound));
    }
    fmt::print(out, "  fitted K = {:.4e}, log-log slope = {:.4f} {}\n", r.fitted_K,
               r.loglog_slope, r.slope_ok ? "ok" : "FAIL");
  }
  write_file(out_dir(cfg, opt) / "derivative.csv", csv);
  return 0;
}

int cmd_oracle(const LabConfig& cfg, const CommandOptions& opt, std::ostream& out) {
  const double alpha = selected_alpha(cfg, opt);
  std::string csv = "word_id,alpha,lambda_m,lambda_oracle,difference,front_m,front_ratio\n";
  for (const auto& w : selected_words(cfg, opt)) {
    const BilliardOrbit o = solve_word(w.word, cfg, alpha);
    const double lam = orbit_lambda(o, cfg.burn_in);
    const double orc = jacobian_lyapunov_oracle(o, cfg.family, 1e-6, {}, cfg.burn_in);
    const bool periodic = o.kind == OrbitKind::periodic;
    const double k0 = periodic ? periodic_curvature_fixed_point(o)[0] : default_seed(o);
    const CurvatureTrace tr = propagate_curvature(o, k0, periodic ? 8 : 0);
    const std::size_t m = std::min<std::size_t>(8, tr.delta.size());
    const FrontCheck fc = front_expansion_check(o, tr, cfg.family, m);
    fmt::print(out, "{} [{}]: lambda_m {:.12f}, oracle {:.12f}, difference {:.3e}; "
                    "front check m = {} ratio {:.6f}\n",
               w.id, format_word(w.word), lam, orc, orc - lam, m, fc.ratio);
    csv += fmt::format("{},{},{},{},{},{},{}\n", w.id, e12(alpha), e12(lam), e12(orc),
                       e12(orc - lam), m, e12(fc.ratio));
  }
  write_file(out_dir(cfg, opt) / "oracle.csv", csv);
  return 0;
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::no_eclipse: return 3;
    case ErrorKind::solver:
    case ErrorKind::grazing: return 4;
    case ErrorKind::io: return 5;
  }
  return 1;
}

int run_command(const std::string& name, const CommandOptions& options,
                std::ostream& out, std::ostream& err) {
  try {
    using Handler = int (*)(const LabConfig&, const CommandOptions&, std::ostream&);
    Handler handler = nullptr;
    if (name == "check") handler = cmd_check;
    else if (name == "orbit") handler = cmd_orbit;
    else if (name == "lyapunov") handler = cmd_lyapunov;
    else if (name == "sweep") handler = cmd_sweep;
    else if (name == "derivative") handler = cmd_derivative;
    else if (name == "oracle") handler = cmd_oracle;
    else throw config_error(fmt::format("unknown command '{}'", name));
    const LabConfig cfg = load_config(options.config);
    return handler(cfg, options, out);
  } catch (const Error& e) {
    fmt::print(err, "billiard-lab: {}\n", e.what());
    return exit_code(e.kind());
  }
}

}  // namespace billiards
