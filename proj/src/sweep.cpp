#include "billiards/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include <fmt/format.h>

#include "billiards/parallel.hpp"

namespace billiards {
namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v)
    if (std::isfinite(x)) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

BilliardOrbit solve_word(const Word& word, const LabConfig& config, double alpha,
                         const BilliardOrbit* warm) {
  if (warm) return continue_orbit(*warm, config.family, alpha, config.orbit);
  if (word.cyclic)
    return find_periodic_orbit(word, config.family, alpha, config.orbit);
  return find_orbit_segment(word, config.family, alpha, config.padding,
                            config.orbit);
}

double orbit_lambda(const BilliardOrbit& orbit, std::size_t burn_in) {
  if (orbit.kind == OrbitKind::periodic) {
    const double k = periodic_curvature_fixed_point(orbit)[0];
    const CurvatureTrace tr = propagate_curvature(orbit, k);
    return lyapunov_from_trace(tr, 0, tr.delta.size());
  }
  const CurvatureTrace tr = propagate_curvature(orbit, default_seed(orbit));
  return lyapunov_from_trace(tr, burn_in, tr.delta.size());
}

OrbitAnalysis analyze_orbit(const BilliardOrbit& orbit, const LabConfig& config,
                            const TableBounds& bounds) {
  OrbitAnalysis a{orbit, {}, {}, {}, {}, {}};
  const bool periodic = orbit.kind == OrbitKind::periodic;
  const std::size_t burn = periodic ? 0 : config.burn_in;
  a.report = lyapunov_estimate(orbit, bounds, {}, config.burn_in);
  a.trace = propagate_curvature(orbit, a.report.k0);
  a.derivs = orbit_alpha_derivatives(orbit, config.family);
  a.kdot = kdot_trace(orbit, a.trace, a.derivs);
  a.f = f_derivative_sum(orbit, a.trace, a.derivs, a.kdot, burn);
  a.report.F_m = a.f.F_m;
  return a;
}

std::vector<TableBounds> grid_bounds(const LabConfig& config,
                                     const std::vector<double>& alphas,
                                     Execution exec) {
  std::vector<Word> words;
  for (const auto& w : config.words) words.push_back(w.word);
  const PhiSampling sampling = config.phi_sampling(words);
  return table_bounds_grid(config.family, alphas, config.validation_u_points,
                           config.phi_max, sampling, exec);
}

ContinuitySummary continuity_summary(const std::vector<SweepRow>& rows,
                                     const std::vector<TableBounds>& bounds,
                                     const std::vector<double>& alphas) {
  ContinuitySummary s;
  s.d_min = s.k_min = std::numeric_limits<double>::infinity();
  for (const auto& b : bounds) {
    s.d_min = std::min(s.d_min, b.d_min);
    s.k_min = std::min(s.k_min, b.k_min);
    s.d_max = std::max(s.d_max, b.d_max);
    s.k_max = std::max(s.k_max, b.k_max);
  }
  s.C0 = 1.0 / (1.0 + s.d_min * s.k_min);
  for (const auto& r : rows) {
    s.C_d_obs = std::max(s.C_d_obs, r.max_ddot);
    s.C_k_obs = std::max(s.C_k_obs, r.max_kdot);
    s.C_u_obs = std::max(s.C_u_obs, r.max_udot);
    s.C1_obs = std::max(s.C1_obs, r.max_fdot);
  }
  const double alpha0 = alphas.empty() ? 0.0 : alphas.front();
  const double rate = s.C0 * (s.C_d_obs * s.k_max + s.C_k_obs * s.d_max);
  for (const auto& r : rows) {
    if (r.alpha <= alpha0) continue;
    const auto base = std::find_if(rows.begin(), rows.end(), [&](const SweepRow& b) {
      return b.word_id == r.word_id && b.alpha == alpha0;
    });
    if (base == rows.end()) continue;
    const double lhs = std::abs(r.lambda_m - base->lambda_m);
    const double rhs = rate * (r.alpha - alpha0);
    ++s.rows_checked;
    if (lhs > rhs) ++s.violations;
    s.worst_ratio = std::max(s.worst_ratio, rhs > 0.0 ? lhs / rhs
                                                      : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
  }
  return s;
}

SweepResult run_sweep(const LabConfig& config, Execution exec) {
  SweepResult res;
  res.alphas = config.alpha_grid.values();
  res.bounds = grid_bounds(config, res.alphas, exec);

  const std::size_t nw = config.words.size();
  std::vector<std::vector<SweepRow>> rows(nw);
  std::vector<std::vector<SweepFailure>> fails(nw);

  auto track = [&](std::size_t w) {
    const WordSpec& spec = config.words[w];
    std::optional<BilliardOrbit> prev;
    for (std::size_t i = 0; i < res.alphas.size(); ++i) {
      const double alpha = res.alphas[i];
      try {
        BilliardOrbit orbit =
            solve_word(spec.word, config, alpha, prev ? &*prev : nullptr);
        const OrbitAnalysis a = analyze_orbit(orbit, config, res.bounds[i]);
        SweepRow r;
        r.alpha = alpha;
        r.word_id = spec.id;
        r.m = a.report.m;
        r.lambda_m = a.report.lambda_m;
        r.F_m = a.f.F_m;
        r.lower = a.report.lower_bound;
        r.upper = a.report.upper_bound;
        r.max_udot = max_abs(a.derivs.u_dot);
        r.max_kdot = max_abs(a.kdot.k_dot);
        r.max_ddot = max_abs(a.derivs.d_dot);
        r.max_fdot = max_abs(a.f.f_dot);
        r.residual = orbit.residual;
        r.cond = a.derivs.condition_number;
        rows[w].push_back(r);
        prev = std::move(orbit);
      } catch (const Error& e) {
        fails[w].push_back({spec.id, alpha, e.what()});
      }
    }
    auto& rw = rows[w];
    if (!rw.empty() && rw.front().alpha == res.alphas.front()) {
      const SweepRow base = rw.front();
      for (auto& r : rw)
        r.fd_slope = r.alpha == base.alpha
                         ? r.F_m
                         : (r.lambda_m - base.lambda_m) / (r.alpha - base.alpha);
    } else {
      for (auto& r : rw) r.fd_slope = std::numeric_limits<double>::quiet_NaN();
    }
  };

  const auto count = static_cast<long>(nw);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (long w = 0; w < count; ++w) track(static_cast<std::size_t>(w));
  } else {
    for (long w = 0; w < count; ++w) track(static_cast<std::size_t>(w));
  }

  for (std::size_t w = 0; w < nw; ++w) {
    res.rows.insert(res.rows.end(), rows[w].begin(), rows[w].end());
    res.failures.insert(res.failures.end(), fails[w].begin(), fails[w].end());
  }
  std::stable_sort(res.rows.begin(), res.rows.end(),
                   [](const SweepRow& a, const SweepRow& b) {
                     return a.word_id != b.word_id ? a.word_id < b.word_id
                                                   : a.alpha < b.alpha;
                   });
  res.summary = continuity_summary(res.rows, res.bounds, res.alphas);
  return res;
}

std::vector<double> small_alphas(double b) {
  return {1e-1 * b, 3e-2 * b, 1e-2 * b, 3e-3 * b, 1e-3 * b};
}

DerivativeReport run_derivative(const LabConfig& config, const WordSpec& spec,
                                const TableBounds& bounds0) {
  require_differentiable(config);
  const double b = config.family.alpha_max();
  const BilliardOrbit orbit0 = solve_word(spec.word, config, 0.0);
  const OrbitAnalysis a0 = analyze_orbit(orbit0, config, bounds0);
  const std::size_t burn = orbit0.kind == OrbitKind::periodic ? 0 : config.burn_in;

  DerivativeReport rep;
  rep.word_id = spec.id;
  rep.m = a0.report.m;
  rep.lambda0 = a0.report.lambda_m;
  rep.F_m = a0.f.F_m;
  rep.C1_obs = max_abs(a0.f.f_dot);
  rep.F_bound = (max_abs(a0.derivs.d_dot) * bounds0.k_max +
                 bounds0.d_max * max_abs(a0.kdot.k_dot)) /
                (1.0 + bounds0.d_min * bounds0.k_min);
  rep.bound_ok = std::abs(rep.F_m) <= rep.F_bound + 1e-15;

  // Second differences of lambda on a uniform grid covering the small alphas.
  const double h2 = 1e-2 * b;
  std::vector<double> lam;
  for (int i = -1; i <= 11; ++i)
    lam.push_back(orbit_lambda(solve_word(spec.word, config, i * h2, &orbit0), burn));
  for (std::size_t i = 1; i + 1 < lam.size(); ++i)
    rep.C2_obs = std::max(rep.C2_obs,
                          std::abs(lam[i + 1] - 2.0 * lam[i] + lam[i - 1]) / (h2 * h2));

  for (double a : small_alphas(b)) {
    const BilliardOrbit o = solve_word(spec.word, config, a, &orbit0);
    DerivativeRow r;
    r.alpha = a;
    r.lambda = orbit_lambda(o, burn);
    r.fd_slope = (r.lambda - rep.lambda0) / a;
    r.error = std::abs(r.fd_slope - rep.F_m);
    r.bound = 0.5 * rep.C2_obs * a;
    rep.fitted_K = std::max(rep.fitted_K, r.error / a);
    rep.rows.push_back(r);
  }
  rep.remainder_ok = std::all_of(rep.rows.begin(), rep.rows.end(),
                                 [](const DerivativeRow& r) {
                                   return r.error <= r.bound + 1e-12;
                                 });

  // log-log slope of the error over alpha in {1e-1, 1e-2, 1e-3} b
  std::vector<std::pair<double, double>> pts;
  bool rounding = true;
  for (const auto& r : rep.rows) {
    const double rel = r.alpha / b;
    if (std::abs(rel - 1e-1) < 1e-12 || std::abs(rel - 1e-2) < 1e-12 ||
        std::abs(rel - 1e-3) < 1e-12) {
      if (r.error > 1e-12) rounding = false;
      pts.emplace_back(std::log(r.alpha), std::log(std::max(r.error, 1e-300)));
    }
  }
  if (rounding) {
    rep.loglog_slope = std::numeric_limits<double>::quiet_NaN();
    rep.slope_ok = true;
  } else {
    double mx = 0, my = 0;
    for (auto [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxy = 0, sxx = 0;
    for (auto [x, y] : pts) {
      sxy += (x - mx) * (y - my);
      sxx += (x - mx) * (x - mx);
    }
    rep.loglog_slope = sxy / sxx;
    rep.slope_ok = rep.loglog_slope >= 0.9 && std::isfinite(rep.fitted_K);
  }
  return rep;
}

}  // namespace billiards
