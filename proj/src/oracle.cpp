#include <cmath>
#include <numbers>
#include <optional>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <fmt/format.h>

#include "billiards/lyapunov.hpp"

namespace billiards {
namespace {

// Obstacle expected at reflection j (j = 0 is the orbit's first record).
std::size_t expected_obstacle(const BilliardOrbit& orbit, std::size_t j) {
  if (orbit.kind == OrbitKind::periodic)
    return orbit.records[j % orbit.records.size()].obstacle;
  const std::size_t c = orbit.chain.core_begin + j;
  if (c >= orbit.chain.symbols.size())
    throw config_error(fmt::format(
        "orbit segment has no reflection {} (increase padding)", j));
  return orbit.chain.symbols[c];
}

struct MapPoint {
  double u = 0.0;
  double p = 0.0;       // tangential component of the outgoing velocity
  double speed = 0.0;   // |d phi / du|
  double cosphi = 0.0;
  double kappa = 0.0;
};

struct Frame {
  Vec2 q, t, n;
  double speed;
};

Frame frame_at(const DeformationFamily& family, std::size_t i, double u,
               double alpha) {
  const BoundaryJet jet = family.eval_jet(i, u, alpha, 1, 0);
  Frame f;
  f.q = jet(0, 0);
  f.speed = jet(1, 0).norm();
  f.t = jet(1, 0) / f.speed;
  f.n = Vec2{f.t.y(), -f.t.x()};
  return f;
}

// One application of the map in (u, p) coordinates, forced to land on
// `target`.
MapPoint map_step(const DeformationFamily& family, double alpha,
                  std::size_t from, double u, double p, std::size_t target) {
  const Frame f = frame_at(family, from, u, alpha);
  if (std::abs(p) >= 1.0)
    throw grazing_error("perturbed direction is tangent to the boundary");
  const Vec2 v = p * f.t + std::sqrt(1.0 - p * p) * f.n;
  const auto hit = first_intersection(f.q, v, family, alpha, from);
  if (!hit || hit->obstacle != target)
    throw solver_error(fmt::format(
        "perturbed ray left the itinerary (expected obstacle {})", target + 1));
  if (hit->grazing) throw grazing_error("grazing hit during perturbed shooting");
  const Frame g = frame_at(family, hit->obstacle, hit->u, alpha);
  const Vec2 out = reflect(v, g.n);
  MapPoint mp;
  mp.u = hit->u;
  mp.p = out.dot(g.t);
  mp.speed = g.speed;
  mp.cosphi = out.dot(g.n);
  mp.kappa = curvature_from_jet(family.eval_jet(hit->obstacle, hit->u, alpha, 2, 0));
  return mp;
}

double wrapped(double du) { return std::remainder(du, 2.0 * std::numbers::pi); }

struct StepJacobian {
  Eigen::Matrix2d J;
  MapPoint base;
};

StepJacobian step_jacobian(const BilliardOrbit& orbit,
                           const DeformationFamily& family, std::size_t j,
                           double h) {
  const ReflectionRecord& r = orbit.kind == OrbitKind::periodic
                                  ? orbit.records[j % orbit.records.size()]
                                  : orbit.records.at(j);
  const Frame f = frame_at(family, r.obstacle, r.u, orbit.alpha);
  const double p = r.direction.dot(f.t);
  const std::size_t target = expected_obstacle(orbit, j + 1);
  auto at = [&](double du, double dp) {
    return map_step(family, orbit.alpha, r.obstacle, r.u + du, p + dp, target);
  };
  StepJacobian sj;
  sj.base = at(0.0, 0.0);
  const MapPoint up = at(h, 0.0), um = at(-h, 0.0);
  const MapPoint pp = at(0.0, h), pm = at(0.0, -h);
  sj.J(0, 0) = wrapped(up.u - um.u) / (2.0 * h);
  sj.J(1, 0) = (up.p - um.p) / (2.0 * h);
  sj.J(0, 1) = wrapped(pp.u - pm.u) / (2.0 * h);
  sj.J(1, 1) = (pp.p - pm.p) / (2.0 * h);
  if (!sj.J.allFinite()) throw solver_error("non-finite map derivative");
  return sj;
}

constexpr std::size_t kRenormEvery = 5;

}  // namespace

double jacobian_lyapunov_oracle(const BilliardOrbit& orbit,
                                const DeformationFamily& family, double h,
                                std::optional<double> k0, std::size_t burn_in) {
  if (!(h >= 1e-7 && h <= 1e-4))
    throw config_error("oracle step h must lie in [1e-7, 1e-4]");

  if (orbit.kind == OrbitKind::periodic) {
    const std::size_t n = orbit.records.size();
    Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
    double log_scale = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      M = step_jacobian(orbit, family, j, h).J * M;
      if ((j + 1) % kRenormEvery == 0 || j + 1 == n) {
        Eigen::HouseholderQR<Eigen::Matrix2d> qr(M);
        const double s = std::abs(qr.matrixQR()(0, 0));
        if (!(s > 0.0)) throw solver_error("degenerate monodromy");
        M /= s;
        log_scale += std::log(s);
      }
    }
    const Eigen::EigenSolver<Eigen::Matrix2d> es(M, false);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(top > 0.0)) throw solver_error("degenerate monodromy");
    return (log_scale + std::log(top)) / static_cast<double>(n);
  }

  // Segment: follow the tangent vector of the front of curvature k0.
  const std::size_t flights = flight_count(orbit);
  if (flights <= burn_in)
    throw config_error("oracle needs more flights than burn_in");
  const ReflectionRecord& r0 = orbit.records[0];
  const double seed = k0 ? *k0 : default_seed(orbit);
  const Frame f0 = frame_at(family, r0.obstacle, r0.u, orbit.alpha);
  const double c0 = r0.direction.dot(f0.n);
  Eigen::Vector2d w{1.0, f0.speed * c0 * (seed * c0 - r0.kappa)};
  double log_scale = 0.0;
  double log_width_burn = 0.0;
  auto log_width = [&](double speed, double cosphi) {
    return log_scale + std::log(speed * cosphi * std::abs(w(0)));
  };
  if (burn_in == 0) log_width_burn = log_width(f0.speed, c0);
  double last = 0.0;
  for (std::size_t j = 0; j < flights; ++j) {
    const StepJacobian sj = step_jacobian(orbit, family, j, h);
    w = sj.J * w;
    if ((j + 1) % kRenormEvery == 0) {
      const double s = w.norm();
      w /= s;
      log_scale += std::log(s);
    }
    const double lw = log_width(sj.base.speed, sj.base.cosphi);
    if (j + 1 == burn_in) log_width_burn = lw;
    last = lw;
  }
  const double lambda =
      (last - log_width_burn) / static_cast<double>(flights - burn_in);
  if (!std::isfinite(lambda)) throw solver_error("degenerate oracle growth");
  return lambda;
}

FrontCheck front_expansion_check(const BilliardOrbit& orbit,
                                 const CurvatureTrace& trace,
                                 const DeformationFamily& family, std::size_t m,
                                 double epsilon) {
  if (m < 1) throw config_error("front check needs m >= 1");
  if (trace.delta.size() < m)
    throw config_error(fmt::format(
        "trace has {} flights, front check needs {}", trace.delta.size(), m));
  FrontCheck out;
  out.m = m;
  out.predicted = 1.0;
  for (std::size_t j = 0; j < m; ++j) out.predicted /= trace.delta[j];

  const ReflectionRecord& r0 = orbit.records.at(0);
  const double k0 = trace.seed_k0;
  const double tau = 0.5 * *r0.d;
  const double k_tau = curvature_between(k0, tau);

  struct Ray {
    Vec2 q, v;
  };
  auto rotate = [](const Vec2& v, double a) {
    return Vec2{std::cos(a) * v.x() - std::sin(a) * v.y(),
                std::sin(a) * v.x() + std::cos(a) * v.y()};
  };
  auto angle_between = [](const Vec2& from, const Vec2& to) {
    return std::atan2(cross(from, to), from.dot(to));
  };
  // Symmetric pencil around the center ray with half-width eps and the
  // angular spread of a front of curvature k.
  auto pencil = [&](const Ray& c, double eps, double k) -> std::pair<Ray, Ray> {
    const Vec2 side = perp(c.v);
    return {{c.q + eps * side, rotate(c.v, eps * k)},
            {c.q - eps * side, rotate(c.v, -eps * k)}};
  };
  // Reflection j of a ray, with the outgoing direction.
  auto advance = [&](Ray& r, std::optional<std::size_t> from, std::size_t j) {
    const auto hit = first_intersection(r.q, r.v, family, orbit.alpha, from);
    if (!hit || hit->obstacle != expected_obstacle(orbit, j) || hit->grazing)
      throw solver_error("pencil ray left the itinerary");
    const Frame g = frame_at(family, hit->obstacle, hit->u, orbit.alpha);
    r.q = g.q;
    r.v = reflect(r.v, g.n).normalized();
  };
  // Move a ray along itself onto the line through c perpendicular to c.v.
  auto to_section = [](const Ray& r, const Ray& c) {
    const double t = (c.q - r.q).dot(c.v) / r.v.dot(c.v);
    return Ray{r.q + t * r.v, r.v};
  };

  // The pencil is renormalized to half-width eps after every reflection; the
  // ratio of front curvature to width is kept, so the front is unchanged.
  double eps = std::min(epsilon, 1e-4);
  for (int attempt = 0; attempt < 2; ++attempt, eps /= 10.0) {
    try {
      Ray c{r0.point + tau * r0.direction, r0.direction};
      auto [a, b] = pencil(c, eps, k_tau);
      double log_growth = std::log1p(tau * k0);
      std::optional<std::size_t> from;
      for (std::size_t j = 1; j <= m; ++j) {
        advance(c, from, j);
        advance(a, from, j);
        advance(b, from, j);
        from = expected_obstacle(orbit, j);
        const Ray sa = to_section(a, c), sb = to_section(b, c);
        const double width = (sa.q - sb.q).dot(perp(c.v));
        const double spread = angle_between(sb.v, sa.v);
        // reflection reverses orientation, so width and spread change sign
        // together
        if (!(std::abs(width) > 0.0)) throw solver_error("pencil rays crossed");
        log_growth += std::log(std::abs(width) / (2.0 * eps));
        std::tie(a, b) = pencil(c, eps, spread / width);
      }
      out.epsilon = eps;
      out.measured = std::exp(log_growth);
      out.ratio = std::exp(log_growth - std::log(out.predicted));
      return out;
    } catch (const Error& e) {
      if (attempt == 1) throw;
    }
  }
  return out;
}

}  // namespace billiards
