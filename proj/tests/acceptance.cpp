// Acceptance run: one PASS/FAIL line per criterion with its measured value,
// tolerance and wall time. Exit status is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "billiards/commands.hpp"
#include "billiards/config.hpp"
#include "billiards/lyapunov.hpp"
#include "billiards/outputs.hpp"
#include "billiards/sweep.hpp"
#include "fd_oracle.hpp"
#include "tables.hpp"

using namespace billiards;
using namespace billiards::test;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const std::vector<std::string> kShipped = {"two_circles_translate", "two_circles_grow",
                                           "three_circles", "ellipses",
                                           "translate_low_smoothness"};

LabConfig shipped(const std::string& name) {
  return load_config(fs::path(kConfigDir) / (name + ".cfg"));
}

fs::path work_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "billiards_acceptance" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// lambda_m of the first data row of lyapunov.csv
double csv_lambda(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  std::vector<std::string> cells;
  std::stringstream ls(line);
  for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
  return std::stod(cells.at(5));
}

double lambda_via_command(const std::string& config, const std::string& word,
                          const std::string& tag) {
  CommandOptions opt;
  opt.config = fs::path(kConfigDir) / config;
  opt.word = word;
  opt.alpha = 0.0;
  opt.out = work_dir(tag);
  std::ostringstream out, err;
  if (run_command("lyapunov", opt, out, err) != 0)
    throw std::runtime_error("lyapunov command failed: " + err.str());
  return csv_lambda(*opt.out / "lyapunov.csv");
}

Outcome two_circle_closed_form() {
  const double lam = lambda_via_command("two_circles_translate.cfg", "1,2", "c1");
  const double err = std::abs(lam - std::log(3 + 2 * std::numbers::sqrt2));
  return {err < 1e-9, fmt::format("lambda = {:.12f}, |error| = {:.2e} (< 1e-9)", lam, err)};
}

Outcome three_circle_closed_form() {
  const double lam = lambda_via_command("three_circles.cfg", "1,2", "c2");
  const double err = std::abs(lam - std::log(5 + 2 * std::sqrt(6.0)));
  return {err < 1e-9, fmt::format("lambda = {:.12f}, |error| = {:.2e} (< 1e-9)", lam, err)};
}

Outcome oracle_equivalence() {
  const auto f = three_circles();
  PhiSampling sampling;
  const TableBounds b = table_bounds(f, 0.0, 256, {}, sampling);
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const Word w = sample_itinerary(3, 50, task_seed(2024, i));
    const BilliardOrbit o = find_orbit_segment(w, f, 0.0, 12);
    const LyapunovReport r = lyapunov_estimate(o, b, {}, 10);
    const double oracle = jacobian_lyapunov_oracle(o, f, 1e-6, r.k0, 10);
    worst = std::max(worst, std::abs(oracle - r.lambda_m));
  }
  return {worst < 1e-5, fmt::format("20 words of length 50, max |lambda - oracle| = {:.2e} (< 1e-5)", worst)};
}

Outcome front_check() {
  double worst = 0.0;
  std::size_t checks = 0;
  for (const auto& name : kShipped) {
    const LabConfig cfg = shipped(name);
    for (const auto& spec : cfg.words) {
      const BilliardOrbit o = solve_word(spec.word, cfg, 0.0);
      const double k0 = o.kind == OrbitKind::periodic
                            ? periodic_curvature_fixed_point(o)[0]
                            : default_seed(o);
      const CurvatureTrace tr = propagate_curvature(o, k0, 8);
      const std::size_t top = std::min<std::size_t>(8, tr.delta.size());
      for (std::size_t m = 1; m <= top; ++m) {
        worst = std::max(worst, std::abs(front_expansion_check(o, tr, cfg.family, m).ratio - 1));
        ++checks;
      }
    }
  }
  return {worst < 1e-3, fmt::format("{} checks (m = 1..8), max |ratio - 1| = {:.2e} (< 1e-3)", checks, worst)};
}

Outcome bounds_property() {
  std::size_t rows = 0, outside = 0;
  for (const auto& name : kShipped) {
    const SweepResult res = run_sweep(shipped(name));
    for (const auto& r : res.rows) {
      ++rows;
      if (!(r.lower <= r.lambda_m && r.lambda_m <= r.upper)) ++outside;
    }
    if (!res.failures.empty()) outside += res.failures.size();
  }
  return {outside == 0 && rows > 0,
          fmt::format("{} estimates on {} configs, {} outside [lower, upper] or failed", rows,
                      kShipped.size(), outside)};
}

Outcome seed_forgetting() {
  // per step: |k_m(k_min) - k_m(k_max)| <= beta_max^m (k_max - k_min), plus a
  // two-ulp floor once both traces agree to rounding
  std::size_t steps = 0, violations = 0;
  double worst = 0.0;
  for (const char* name : {"three_circles", "ellipses"}) {
    const LabConfig cfg = shipped(name);
    const TableBounds b = grid_bounds(cfg, {0.0})[0];
    const double beta_max = std::pow(1 / (1 + b.d_min * b.k_min), 2);
    for (std::uint64_t i = 0; i < 5; ++i) {
      const Word w = sample_itinerary(3, 60, task_seed(99, i));
      const BilliardOrbit o = solve_word(w, cfg, 0.0);
      const CurvatureTrace lo = propagate_curvature(o, b.k_min);
      const CurvatureTrace hi = propagate_curvature(o, b.k_max);
      double bound = b.k_max - b.k_min;
      for (std::size_t m = 0; m < lo.k.size(); ++m) {
        const double gap = std::abs(lo.k[m] - hi.k[m]);
        const double floor = 2 * std::numeric_limits<double>::epsilon() * std::abs(lo.k[m]);
        ++steps;
        if (gap > bound + floor) ++violations;
        if (bound > floor) worst = std::max(worst, gap / bound);
        bound *= beta_max;
      }
    }
  }
  return {violations == 0,
          fmt::format("{} steps on 10 length-60 orbits, {} violations, max gap/bound {:.3f}",
                      steps, violations, worst)};
}

Outcome derivative_exactness() {
  const LabConfig cfg = shipped("two_circles_translate");
  const TableBounds b = grid_bounds(cfg, {0.0})[0];
  const BilliardOrbit o = solve_word(cfg.words[0].word, cfg, 0.0);
  const OrbitAnalysis a = analyze_orbit(o, cfg, b);
  const double F = std::numbers::sqrt2 / 4;
  const double h = 1e-4;
  const double slope = (orbit_lambda(solve_word(o.word, cfg, h, &o), 0) -
                        orbit_lambda(solve_word(o.word, cfg, -h, &o), 0)) /
                       (2 * h);
  const double e1 = std::abs(a.f.F_m - F), e2 = std::abs(slope - a.f.F_m);
  return {e1 < 1e-9 && e2 < 1e-6,
          fmt::format("F = {:.12f}, |F - sqrt2/4| = {:.2e} (< 1e-9), |central slope - F| = {:.2e} (< 1e-6)",
                      a.f.F_m, e1, e2)};
}

Outcome continuity_modulus(double& three_circle_seconds) {
  std::size_t checked = 0, violations = 0, failures = 0;
  double worst = 0.0;
  std::string big;
  for (const auto& name : kShipped) {
    const LabConfig cfg = shipped(name);
    const auto t0 = std::chrono::steady_clock::now();
    const SweepResult res = run_sweep(cfg);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (name == "three_circles") {
      three_circle_seconds = sec;
      big = fmt::format("{} words x {} alphas in {:.2f} s", cfg.words.size(), res.alphas.size(), sec);
    }
    checked += res.summary.rows_checked;
    violations += res.summary.violations;
    failures += res.failures.size();
    worst = std::max(worst, res.summary.worst_ratio);
  }
  return {violations == 0 && failures == 0 && three_circle_seconds < 60.0,
          fmt::format("{} rows, {} violations, {} lost orbits, worst lhs/rhs {:.3f}; {} (< 60 s)",
                      checked, violations, failures, worst, big)};
}

Outcome differentiability() {
  std::size_t words = 0, bad = 0;
  double min_slope = std::numeric_limits<double>::infinity(), max_K = 0.0;
  for (const auto& name : kShipped) {
    const LabConfig cfg = shipped(name);
    if (cfg.family.smoothness().r_alpha < 3) continue;
    const TableBounds b0 = grid_bounds(cfg, {0.0})[0];
    for (const auto& spec : cfg.words) {
      const DerivativeReport rep = run_derivative(cfg, spec, b0);
      ++words;
      if (!rep.slope_ok || !std::isfinite(rep.fitted_K)) ++bad;
      if (std::isfinite(rep.loglog_slope)) min_slope = std::min(min_slope, rep.loglog_slope);
      max_K = std::max(max_K, rep.fitted_K);
    }
  }
  return {bad == 0, fmt::format("{} words, {} failing; min log-log slope {:.3f} (>= 0.9), max fitted K {:.3e}",
                                words, bad, min_slope, max_K)};
}

Outcome implicit_derivative_oracle() {
  std::size_t orbits = 0, bad = 0;
  double worst = 0.0;
  for (const auto& name : kShipped) {
    const LabConfig cfg = shipped(name);
    const auto alphas = cfg.alpha_grid.values();
    for (const auto& spec : cfg.words) {
      const BilliardOrbit* prev = nullptr;
      BilliardOrbit o;
      for (double a : alphas) {
        o = solve_word(spec.word, cfg, a, prev);
        prev = &o;
        const double gap = derivative_gap(orbit_alpha_derivatives(o, cfg.family),
                                          fd_alpha_derivatives(o, cfg.family, 1e-5, cfg.orbit));
        ++orbits;
        if (!(gap <= 1e-6)) ++bad;
        worst = std::max(worst, gap);
      }
    }
  }
  return {bad == 0, fmt::format("{} sweep orbits, {} above tolerance, max relative gap {:.2e} (< 1e-6)",
                                orbits, bad, worst)};
}

Outcome determinism() {
  std::vector<fs::path> dirs;
  for (int run = 0; run < 2; ++run) {
    CommandOptions opt;
    opt.config = fs::path(kConfigDir) / "three_circles.cfg";
    opt.out = work_dir(fmt::format("det{}", run));
    std::ostringstream out, err;
    if (run_command("sweep", opt, out, err) != 0) return {false, "sweep failed: " + err.str()};
    dirs.push_back(*opt.out);
  }
  std::size_t files = 0, differ = 0;
  for (const char* f : {"sweep.csv", "bounds.csv", "words.csv", "sweep_failures.csv", "sweep.gp"}) {
    ++files;
    const std::string a = slurp(dirs[0] / f), b = slurp(dirs[1] / f);
    if (a.empty() || a != b) ++differ;
  }
  return {differ == 0, fmt::format("{} output files compared, {} differ", files, differ)};
}

}  // namespace

int main() {
  double sweep_seconds = 0.0;
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "two-circle closed form", 1, two_circle_closed_form},
      {2, "three-circle closed form", 1, three_circle_closed_form},
      {3, "oracle equivalence", 30, oracle_equivalence},
      {4, "delta-product front check", 5, front_check},
      {5, "a-priori bounds", 10, bounds_property},
      {6, "seed forgetting", 5, seed_forgetting},
      {7, "derivative exactness", 2, derivative_exactness},
      {8, "continuity modulus", 60, [&] { return continuity_modulus(sweep_seconds); }},
      {9, "differentiability", 60, differentiability},
      {10, "implicit-derivative oracle", 30, implicit_derivative_oracle},
      {11, "determinism", 1e300, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // criterion 8 limits the three-circle sweep itself, checked inside
    const bool in_time = c.id == 8 || sec < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::string limit = c.limit_s < 1e299 ? fmt::format(" / {:g} s", c.limit_s) : "";
    fmt::print("[{}] {:2d} {:<28} {:7.2f} s{}  {}\n", pass ? "PASS" : "FAIL", c.id, c.name, sec,
               limit, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
             criteria.size());
  return failed;
}
