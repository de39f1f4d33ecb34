#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "billiards/geometry.hpp"
#include "billiards/parallel.hpp"

namespace billiards {
namespace {

struct Blocker {
  Vec2 center;
  double r_in, r_out;
  bool round;
};

// True when the segment comes within `margin` of obstacle j.
bool segment_blocked(const DeformationFamily& family, std::size_t j,
                     double alpha, const Blocker& blk, const Vec2& a,
                     const Vec2& b, double margin) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t =
      len2 > 0.0 ? std::clamp((blk.center - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  const double cd = (a + t * ab - blk.center).norm();
  if (cd - blk.r_out > margin) return false;
  if (blk.round || cd <= blk.r_in) return true;
  return segment_distance_to_obstacle(family, j, alpha, a, b) <= margin;
}

double outer_radius(const ObstacleSpec& ob, double alpha) {
  return std::max(ob.semi_a(alpha), ob.semi_b(alpha));
}

// Every segment between K_i and K_k lies in the capsule of radius
// max(R_i, R_k) around [c_i, c_k]. True when K_j is farther than margin from it.
bool triple_separated(const DeformationFamily& family, std::size_t i,
                      std::size_t j, std::size_t k, double alpha, double margin) {
  const ObstacleSpec &oi = family.obstacle(i), &oj = family.obstacle(j),
                     &ok = family.obstacle(k);
  const Vec2 ci = oi.center(alpha), ck = ok.center(alpha), cj = oj.center(alpha);
  const Vec2 ab = ck - ci;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((cj - ci).dot(ab) / len2, 0.0, 1.0) : 0.0;
  const double axis = (ci + t * ab - cj).norm();
  const double r = std::max(outer_radius(oi, alpha), outer_radius(ok, alpha));
  return axis - r - outer_radius(oj, alpha) > margin;
}

std::vector<Vec2> boundary_samples(const DeformationFamily& family,
                                   std::size_t i, double alpha, int n) {
  std::vector<Vec2> pts(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s)
    pts[static_cast<std::size_t>(s)] =
        family.point(i, 2.0 * std::numbers::pi * s / n, alpha);
  return pts;
}

}  // namespace

NoEclipseCertificate check_no_eclipse(const DeformationFamily& family,
                                      double alpha, int n_samples,
                                      double margin, Execution exec) {
  if (n_samples < 64)
    throw config_error(
        fmt::format("check_no_eclipse needs n_samples >= 64, got {}", n_samples));
  if (margin < 0.0) throw config_error("check_no_eclipse needs margin >= 0");
  family.check_alpha(alpha);

  const std::size_t z = family.size();
  std::vector<std::vector<Vec2>> samples(z);
  for (std::size_t i = 0; i < z; ++i)
    samples[i] = boundary_samples(family, i, alpha, n_samples);

  const auto n = static_cast<std::int64_t>(n_samples);
  for (std::size_t i = 0; i < z; ++i) {
    for (std::size_t j = 0; j < z; ++j) {
      for (std::size_t k = i + 1; k < z; ++k) {
        if (j == i || j == k) continue;
        if (triple_separated(family, i, j, k, alpha, margin)) continue;
        const ObstacleSpec& ob = family.obstacle(j);
        const double ra = ob.semi_a(alpha), rb = ob.semi_b(alpha);
        const Blocker blk{ob.center(alpha), std::min(ra, rb), std::max(ra, rb),
                          ob.kind == ObstacleKind::circle || ra == rb};
        const auto& from = samples[i];
        const auto& to = samples[k];
        const std::int64_t total = n * n;
        std::int64_t first = total;

        if (exec == Execution::serial) {
          for (std::int64_t idx = 0; idx < total && first == total; ++idx) {
            if (segment_blocked(family, j, alpha, blk,
                                from[static_cast<std::size_t>(idx / n)],
                                to[static_cast<std::size_t>(idx % n)], margin))
              first = idx;
          }
        } else {
#pragma omp parallel for num_threads(worker_count()) reduction(min : first) schedule(static)
          for (std::int64_t idx = 0; idx < total; ++idx) {
            if (idx >= first) continue;
            if (segment_blocked(family, j, alpha, blk,
                                from[static_cast<std::size_t>(idx / n)],
                                to[static_cast<std::size_t>(idx % n)], margin))
              first = std::min(first, idx);
          }
        }

        if (first < total) {
          NoEclipseCertificate cert;
          cert.holds = false;
          cert.witness = EclipseWitness{i, j, k,
                                        from[static_cast<std::size_t>(first / n)],
                                        to[static_cast<std::size_t>(first % n)]};
          return cert;
        }
      }
    }
  }
  return {};
}

void validate_family(const DeformationFamily& family, int alpha_points,
                     int u_points) {
  if (alpha_points < 2 || u_points < 64)
    throw config_error("validation grid needs >= 2 alpha points and >= 64 u points");
  const double b = family.alpha_max();
  for (int p = 0; p < alpha_points; ++p) {
    const double alpha = b * p / (alpha_points - 1);
    for (std::size_t i = 0; i < family.size(); ++i) {
      const ObstacleSpec& ob = family.obstacle(i);
      if (!(ob.semi_a(alpha) > 0.0) || !(ob.semi_b(alpha) > 0.0))
        throw config_error(fmt::format(
            "obstacle {}: nonpositive radius/semi-axis at alpha = {}", i + 1,
            alpha));
      for (int s = 0; s < u_points; ++s)
        curvature(family, i, 2.0 * std::numbers::pi * s / u_points, alpha);
    }
    const auto cert = check_no_eclipse(family, alpha, u_points, 0.0);
    if (!cert.holds) {
      const auto& w = *cert.witness;
      throw Error(ErrorKind::no_eclipse,
                  fmt::format("condition (H) fails at alpha = {}: segment from "
                              "obstacle {} to obstacle {} meets obstacle {} "
                              "(witness triple ({}, {}, {}))",
                              alpha, w.i + 1, w.k + 1, w.j + 1, w.i + 1,
                              w.j + 1, w.k + 1));
    }
  }
}

}  // namespace billiards
