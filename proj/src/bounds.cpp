#include "billiards/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <vector>

#include <Eigen/LU>
#include <fmt/format.h>

#include "billiards/orbit.hpp"
#include "billiards/parallel.hpp"

namespace billiards {
namespace {

// Newton on F(u, v) = |phi_k(v) - phi_i(u)|^2 / 2 from a sampled seed; keeps
// the best value in the requested direction.
double polish_distance(const DeformationFamily& family, std::size_t i,
                       std::size_t k, double alpha, double u, double v,
                       bool maximize) {
  auto value = [&](double a, double b) {
    return (family.point(k, b, alpha) - family.point(i, a, alpha)).norm();
  };
  double best = value(u, v);
  for (int it = 0; it < 30; ++it) {
    const BoundaryJet ji = family.eval_jet(i, u, alpha, 2, 0);
    const BoundaryJet jk = family.eval_jet(k, v, alpha, 2, 0);
    const Vec2 D = jk(0, 0) - ji(0, 0);
    const Eigen::Vector2d g{-D.dot(ji(1, 0)), D.dot(jk(1, 0))};
    Eigen::Matrix2d H;
    H(0, 0) = ji(1, 0).squaredNorm() - D.dot(ji(2, 0));
    H(1, 1) = jk(1, 0).squaredNorm() + D.dot(jk(2, 0));
    H(0, 1) = H(1, 0) = -ji(1, 0).dot(jk(1, 0));
    if (g.norm() < 1e-15) break;
    Eigen::Vector2d step = H.fullPivLu().solve(-g);
    if (!step.allFinite()) break;
    const double cap = step.cwiseAbs().maxCoeff();
    if (cap > 0.2) step *= 0.2 / cap;
    double lambda = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 20; ++bt, lambda *= 0.5) {
      const double trial = value(u + lambda * step(0), v + lambda * step(1));
      if (maximize ? trial >= best : trial <= best) {
        u += lambda * step(0);
        v += lambda * step(1);
        best = trial;
        moved = true;
        break;
      }
    }
    if (!moved || lambda * step.norm() < 1e-14) break;
  }
  return best;
}

double boundary_distance(const DeformationFamily& family, std::size_t i,
                         std::size_t k, double alpha, int n_samples,
                         bool maximize) {
  family.check_index(i);
  family.check_index(k);
  const int n = std::max(16, n_samples);
  std::vector<Vec2> pi(static_cast<std::size_t>(n)), pk(pi.size());
  for (int s = 0; s < n; ++s) {
    const double u = 2.0 * std::numbers::pi * s / n;
    pi[static_cast<std::size_t>(s)] = family.point(i, u, alpha);
    pk[static_cast<std::size_t>(s)] = family.point(k, u, alpha);
  }
  double best = maximize ? -1.0 : std::numeric_limits<double>::infinity();
  int bu = 0, bv = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double d = (pk[static_cast<std::size_t>(b)] -
                        pi[static_cast<std::size_t>(a)]).squaredNorm();
      if (maximize ? d > best : d < best) {
        best = d;
        bu = a;
        bv = b;
      }
    }
  return polish_distance(family, i, k, alpha, 2.0 * std::numbers::pi * bu / n,
                         2.0 * std::numbers::pi * bv / n, maximize);
}

}  // namespace

double inflate_phi(double phi_sampled) {
  const double c = 1.0 - (1.0 - std::cos(phi_sampled)) / 0.99;
  if (c <= 0.0) return std::numbers::pi / 2;
  return std::acos(std::min(1.0, c));
}

double boundary_distance_min(const DeformationFamily& family, std::size_t i,
                             std::size_t k, double alpha, int n_samples) {
  return boundary_distance(family, i, k, alpha, n_samples, false);
}

double boundary_distance_max(const DeformationFamily& family, std::size_t i,
                             std::size_t k, double alpha, int n_samples) {
  return boundary_distance(family, i, k, alpha, n_samples, true);
}

namespace {

std::vector<Word> phi_sampling_words(std::size_t z0, const PhiSampling& sampling,
                                     std::size_t* n_periodic) {
  std::vector<Word> words = enumerate_periodic_words(z0, sampling.max_period);
  *n_periodic = words.size();
  for (std::size_t s = 0; s < sampling.random_words; ++s)
    words.push_back(sample_itinerary(z0, sampling.random_length,
                                     task_seed(sampling.seed, s)));
  words.insert(words.end(), sampling.extra_words.begin(),
               sampling.extra_words.end());
  // repeats add nothing to a maximum; with two obstacles every sampled
  // itinerary is the same alternating word
  std::set<std::pair<bool, std::vector<std::size_t>>> seen;
  std::vector<Word> unique;
  std::size_t periodic_kept = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const bool periodic = words[i].cyclic || i < *n_periodic;
    if (!seen.emplace(periodic, words[i].symbols).second) continue;
    if (i < *n_periodic) ++periodic_kept;
    unique.push_back(std::move(words[i]));
  }
  *n_periodic = periodic_kept;
  return unique;
}

// phi and flight-length maxima of each word at each alpha. A word is walked
// along the alpha list warm-started from its previous solution, with a cold
// solve when the continuation fails. Words are independent, so the result
// does not depend on the schedule.
void sample_words(const DeformationFamily& family, std::span<const double> alphas,
                  const PhiSampling& sampling, Execution exec,
                  std::vector<double>& phi, std::vector<double>& dist) {
  std::size_t n_periodic = 0;
  const std::vector<Word> words = phi_sampling_words(family.size(), sampling, &n_periodic);
  const std::size_t na = alphas.size();
  phi.assign(na, 0.0);
  dist.assign(na, 0.0);
  std::vector<double> wphi(words.size() * na, 0.0), wdist(wphi.size(), 0.0);
  std::vector<std::exception_ptr> failure(words.size());

  OrbitOptions opt;
  opt.check_shadowing = false;
  auto work = [&](long w) {
    const auto idx = static_cast<std::size_t>(w);
    const Word& word = words[idx];
    const bool periodic = word.cyclic || idx < n_periodic;
    auto cold = [&](double a) {
      return periodic ? find_periodic_orbit(Word{word.symbols, true}, family, a, opt)
                      : find_orbit_segment(word, family, a, sampling.padding, opt);
    };
    try {
      std::optional<BilliardOrbit> prev;
      for (std::size_t ia = 0; ia < na; ++ia) {
        std::optional<BilliardOrbit> orbit;
        if (prev) {
          try {
            orbit = continue_orbit(*prev, family, alphas[ia], opt);
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::solver && e.kind() != ErrorKind::grazing) throw;
          }
        }
        if (!orbit) orbit = cold(alphas[ia]);
        for (const auto& r : orbit->records) {
          wphi[idx * na + ia] = std::max(wphi[idx * na + ia], r.phi);
          if (r.d) wdist[idx * na + ia] = std::max(wdist[idx * na + ia], *r.d);
        }
        prev = std::move(orbit);
      }
    } catch (...) {
      failure[idx] = std::current_exception();
    }
  };

  const auto count = static_cast<long>(words.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (long w = 0; w < count; ++w) work(w);
  } else {
    for (long w = 0; w < count; ++w) work(w);
  }
  for (const auto& f : failure)
    if (f) std::rethrow_exception(f);
  for (std::size_t w = 0; w < words.size(); ++w)
    for (std::size_t ia = 0; ia < na; ++ia) {
      phi[ia] = std::max(phi[ia], wphi[w * na + ia]);
      dist[ia] = std::max(dist[ia], wdist[w * na + ia]);
    }
}

TableBounds assemble_bounds(const DeformationFamily& family, double alpha,
                            int n_samples, std::optional<double> phi_max_override,
                            double phi_sampled, double d_orbit) {
  family.check_alpha(alpha);
  if (n_samples < 16) throw config_error("table_bounds needs n_samples >= 16");
  TableBounds tb;
  tb.d_min = std::numeric_limits<double>::infinity();
  const int seed_samples = std::min(n_samples, 256);
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t k = i + 1; k < family.size(); ++k) {
      tb.d_min = std::min(tb.d_min,
                          boundary_distance_min(family, i, k, alpha, seed_samples));
      tb.d_max = std::max(tb.d_max,
                          boundary_distance_max(family, i, k, alpha, seed_samples));
    }

  tb.kappa_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < family.size(); ++i)
    for (int s = 0; s < n_samples; ++s) {
      const double u = 2.0 * std::numbers::pi * s / n_samples;
      const double kap = curvature(family, i, u, alpha);
      tb.kappa_min = std::min(tb.kappa_min, kap);
      tb.kappa_max = std::max(tb.kappa_max, kap);
    }

  tb.d_max_orbit = d_orbit;
  tb.phi_max = phi_max_override ? *phi_max_override : inflate_phi(phi_sampled);
  if (!(tb.phi_max >= 0.0 && tb.phi_max < std::numbers::pi / 2 - 1e-12))
    throw config_error(fmt::format(
        "phi_max estimate {:.6f} rad at alpha = {} is not below pi/2; k_max "
        "would diverge",
        tb.phi_max, alpha));
  tb.k_min = 2.0 * tb.kappa_min;
  tb.k_max = 1.0 / tb.d_min + 2.0 * tb.kappa_max / std::cos(tb.phi_max);
  return tb;
}

}  // namespace

std::pair<double, double> sample_phi_max(const DeformationFamily& family,
                                         double alpha,
                                         const PhiSampling& sampling,
                                         Execution exec) {
  family.check_alpha(alpha);
  std::vector<double> phi, dist;
  sample_words(family, std::span<const double>(&alpha, 1), sampling, exec, phi, dist);
  return {phi[0], dist[0]};
}

TableBounds table_bounds(const DeformationFamily& family, double alpha,
                         int n_samples, std::optional<double> phi_max_override,
                         const PhiSampling& sampling, Execution exec) {
  family.check_alpha(alpha);
  if (n_samples < 16) throw config_error("table_bounds needs n_samples >= 16");
  const auto [phi, dist] = sample_phi_max(family, alpha, sampling, exec);
  return assemble_bounds(family, alpha, n_samples, phi_max_override, phi, dist);
}

std::vector<TableBounds> table_bounds_grid(const DeformationFamily& family,
                                           std::span<const double> alphas,
                                           int n_samples,
                                           std::optional<double> phi_max_override,
                                           const PhiSampling& sampling,
                                           Execution exec) {
  for (double a : alphas) family.check_alpha(a);
  if (n_samples < 16) throw config_error("table_bounds needs n_samples >= 16");
  std::vector<double> phi, dist;
  sample_words(family, alphas, sampling, exec, phi, dist);
  std::vector<TableBounds> out;
  out.reserve(alphas.size());
  for (std::size_t i = 0; i < alphas.size(); ++i)
    out.push_back(assemble_bounds(family, alphas[i], n_samples, phi_max_override,
                                  phi[i], dist[i]));
  return out;
}

std::pair<double, double> lyapunov_bounds(const TableBounds& b) {
  return {std::log1p(b.d_min * b.k_min), std::log1p(b.d_max * b.k_max)};
}

}  // namespace billiards
