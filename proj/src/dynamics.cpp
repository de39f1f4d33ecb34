#include "billiards/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace billiards {

Vec2 reflect(const Vec2& v, const Vec2& n) { return v - 2.0 * v.dot(n) * n; }

std::optional<RayHit> first_intersection(const Vec2& q, const Vec2& v,
                                         const DeformationFamily& family,
                                         double alpha,
                                         std::optional<std::size_t> exclude,
                                         double t_floor) {
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (exclude && *exclude == i) continue;
    const ObstacleSpec& ob = family.obstacle(i);
    const double a = ob.semi_a(alpha), b = ob.semi_b(alpha);
    const double th = ob.rotation(alpha);
    const double ct = std::cos(th), st = std::sin(th);
    const Vec2 rel = q - ob.center(alpha);
    // Ellipse frame, then scaled to the unit circle: |P + t W| = 1.
    const Vec2 p{(ct * rel.x() + st * rel.y()) / a,
                 (-st * rel.x() + ct * rel.y()) / b};
    const Vec2 w{(ct * v.x() + st * v.y()) / a, (-st * v.x() + ct * v.y()) / b};
    const double qa = w.squaredNorm();
    const double qb = p.dot(w);
    const double qc = p.squaredNorm() - 1.0;
    const double disc = qb * qb - qa * qc;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    // Entry root (-qb - sq) / qa, written without cancellation.
    const double t = qb < 0.0 ? qc / (-qb + sq) : (-qb - sq) / qa;
    if (!(t > t_floor)) continue;
    if (best && t >= best->t) continue;

    const Vec2 hit = p + t * w;
    double u = std::atan2(hit.y(), hit.x());
    // Polish so that phi(u) lies on the ray.
    for (int it = 0; it < 5; ++it) {
      const BoundaryJet jet = family.eval_jet(i, u, alpha, 1, 0);
      const double res = cross(v, jet(0, 0) - q);
      const double dres = cross(v, jet(1, 0));
      if (res == 0.0 || dres == 0.0) break;
      const double step = res / dres;
      u -= step;
      if (std::abs(step) < 1e-15) break;
    }
    const BoundaryJet jet = family.eval_jet(i, u, alpha, 1, 0);
    const Vec2 tan = jet(1, 0);
    const Vec2 n = Vec2{tan.y(), -tan.x()} / tan.norm();
    RayHit h;
    h.obstacle = i;
    h.u = u;
    h.t = (jet(0, 0) - q).dot(v);
    h.grazing = std::abs(v.dot(n)) < kGrazingTolerance;
    best = h;
  }
  return best;
}

std::optional<PhaseState> billiard_step(const PhaseState& state,
                                        const DeformationFamily& family,
                                        double t_floor) {
  const Vec2 q = family.point(state.obstacle, state.u, state.alpha);
  const auto hit = first_intersection(q, state.direction, family, state.alpha,
                                      state.obstacle, t_floor);
  if (!hit) return std::nullopt;
  if (hit->grazing)
    throw grazing_error(fmt::format("grazing impact on obstacle {} at u = {}",
                                    hit->obstacle + 1, hit->u));
  const Vec2 n = outward_normal(family, hit->obstacle, hit->u, state.alpha);
  PhaseState next;
  next.obstacle = hit->obstacle;
  next.u = hit->u;
  next.direction = reflect(state.direction, n).normalized();
  next.alpha = state.alpha;
  return next;
}

ReflectionRecord make_record(const DeformationFamily& family,
                             const PhaseState& state) {
  const BoundaryJet jet =
      family.eval_jet(state.obstacle, state.u, state.alpha, 2, 0);
  const Vec2 tan = jet(1, 0);
  const Vec2 n = Vec2{tan.y(), -tan.x()} / tan.norm();
  ReflectionRecord rec;
  rec.obstacle = state.obstacle;
  rec.u = state.u;
  rec.point = jet(0, 0);
  rec.direction = state.direction;
  rec.phi = std::acos(std::clamp(n.dot(state.direction), -1.0, 1.0));
  rec.kappa = curvature_from_jet(jet);
  return rec;
}

Trajectory trajectory(const PhaseState& state, const DeformationFamily& family,
                      int m, double t_floor) {
  if (m < 1) throw config_error("trajectory needs m >= 1");
  Trajectory out;
  out.records.push_back(make_record(family, state));
  PhaseState cur = state;
  for (int step = 0; step < m; ++step) {
    std::optional<PhaseState> next;
    try {
      next = billiard_step(cur, family, t_floor);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::grazing) throw;
      out.status = TrajectoryStatus::grazing;
      return out;
    }
    if (!next) {
      out.status = TrajectoryStatus::escaped;
      return out;
    }
    ReflectionRecord rec = make_record(family, *next);
    ReflectionRecord& prev = out.records.back();
    prev.d = (rec.point - prev.point).norm();
    rec.t = prev.t + *prev.d;
    out.records.push_back(rec);
    cur = *next;
  }
  return out;
}

}  // namespace billiards
