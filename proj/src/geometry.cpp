#include "billiards/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

namespace billiards {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

using Series = std::vector<double>;

Series series_mul(const Series& a, const Series& b) {
  Series out(a.size(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k)
    for (std::size_t i = 0; i <= k; ++i) out[k] += a[i] * b[k - i];
  return out;
}

// sin and cos of a truncated power series.
void series_sincos(const Series& theta, Series& s, Series& c) {
  const std::size_t n = theta.size();
  s.assign(n, 0.0);
  c.assign(n, 0.0);
  s[0] = std::sin(theta[0]);
  c[0] = std::cos(theta[0]);
  for (std::size_t k = 1; k < n; ++k) {
    double sk = 0.0, ck = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      sk += static_cast<double>(j) * theta[j] * c[k - j];
      ck -= static_cast<double>(j) * theta[j] * s[k - j];
    }
    s[k] = sk / static_cast<double>(k);
    c[k] = ck / static_cast<double>(k);
  }
}

// d^l/du^l of cos u and sin u.
double dcos(double u, int l) {
  switch (l % 4) {
    case 0: return std::cos(u);
    case 1: return -std::sin(u);
    case 2: return -std::cos(u);
    default: return std::sin(u);
  }
}
double dsin(double u, int l) { return dcos(u, l + 3); }

// Robust root for the point-ellipse distance (Eberly).
double ellipse_root(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
  double s = 0.0;
  for (int i = 0; i < 200; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double ratio0 = n0 / (s + r0);
    const double ratio1 = z1 / (s + 1.0);
    g = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
    if (g > 0.0)
      s0 = s;
    else if (g < 0.0)
      s1 = s;
    else
      break;
  }
  return s;
}

// Distance from (y0, y1), both >= 0 and outside, to the ellipse with
// semi-axes e0 >= e1 > 0.
double ellipse_distance_first_quadrant(double e0, double e1, double y0,
                                       double y1) {
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0, z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (e0 / e1) * (e0 / e1);
      const double sbar = ellipse_root(r0, z0, z1, g);
      const double x0 = r0 * y0 / (sbar + r0);
      const double x1 = y1 / (sbar + 1.0);
      return std::hypot(x0 - y0, x1 - y1);
    }
    return std::abs(y1 - e1);
  }
  const double numer0 = e0 * y0;
  const double denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    const double x0 = e0 * xde0;
    const double x1 = e1 * std::sqrt(1.0 - xde0 * xde0);
    return std::hypot(x0 - y0, x1);
  }
  return std::abs(y0 - e0);
}

}  // namespace

// --- Polynomial -------------------------------------------------------------

double Polynomial::derivative(double x, int order) const {
  double acc = 0.0;
  for (int i = static_cast<int>(coeffs_.size()) - 1; i >= order; --i) {
    const double falling = factorial(i) / factorial(i - order);
    acc = acc * x + coeffs_[static_cast<std::size_t>(i)] * falling;
  }
  return acc;
}

std::vector<double> Polynomial::taylor(double x, int n) const {
  std::vector<double> out(static_cast<std::size_t>(n + 1));
  for (int k = 0; k <= n; ++k)
    out[static_cast<std::size_t>(k)] = derivative(x, k) / factorial(k);
  return out;
}

int Polynomial::degree() const {
  for (int i = static_cast<int>(coeffs_.size()) - 1; i >= 0; --i)
    if (coeffs_[static_cast<std::size_t>(i)] != 0.0) return i;
  return coeffs_.empty() ? -1 : 0;
}

// --- ObstacleSpec -----------------------------------------------------------

ObstacleSpec ObstacleSpec::circle(Polynomial cx, Polynomial cy,
                                  Polynomial radius) {
  ObstacleSpec s;
  s.kind = ObstacleKind::circle;
  s.center_x = std::move(cx);
  s.center_y = std::move(cy);
  s.semi_a = radius;
  s.semi_b = std::move(radius);
  s.rotation = Polynomial{0.0};
  return s;
}

ObstacleSpec ObstacleSpec::ellipse(Polynomial cx, Polynomial cy, Polynomial a,
                                   Polynomial b, Polynomial rotation) {
  ObstacleSpec s;
  s.kind = ObstacleKind::ellipse;
  s.center_x = std::move(cx);
  s.center_y = std::move(cy);
  s.semi_a = std::move(a);
  s.semi_b = std::move(b);
  s.rotation = std::move(rotation);
  return s;
}

int ObstacleSpec::max_degree() const {
  return std::max({center_x.degree(), center_y.degree(), semi_a.degree(),
                   semi_b.degree(), rotation.degree()});
}

// --- DeformationFamily ------------------------------------------------------

DeformationFamily::DeformationFamily(std::vector<ObstacleSpec> obstacles,
                                     double alpha_max, Smoothness smoothness,
                                     bool period_two_mode)
    : obstacles_(std::move(obstacles)),
      alpha_max_(alpha_max),
      smoothness_(smoothness),
      period_two_mode_(period_two_mode) {
  if (period_two_mode_ && obstacles_.size() != 2)
    throw config_error(fmt::format(
        "period-2 mode requires exactly 2 obstacles, got {}", obstacles_.size()));
  if (!period_two_mode_ && obstacles_.size() < 3)
    throw config_error(fmt::format(
        "multi-obstacle mode requires at least 3 obstacles, got {}",
        obstacles_.size()));
  if (!(alpha_max_ >= 0.0) || !std::isfinite(alpha_max_))
    throw config_error("alpha range must be [0, b] with finite b >= 0");
  if (smoothness_.r < 2 || smoothness_.r_alpha < 0)
    throw config_error("smoothness must satisfy r >= 2, r' >= 0");
  for (std::size_t i = 0; i < obstacles_.size(); ++i) {
    if (obstacles_[i].max_degree() > smoothness_.r_alpha)
      throw config_error(fmt::format(
          "obstacle {}: polynomial degree {} exceeds declared r' = {}", i + 1,
          obstacles_[i].max_degree(), smoothness_.r_alpha));
  }
}

double DeformationFamily::alpha_margin() const {
  return 1e-3 + 1e-2 * alpha_max_;
}

void DeformationFamily::check_alpha(double alpha) const {
  const double m = alpha_margin();
  if (!(alpha >= -m && alpha <= alpha_max_ + m))
    throw config_error(fmt::format("alpha = {} outside deformation range [0, {}]",
                                   alpha, alpha_max_));
}

void DeformationFamily::check_index(std::size_t i) const {
  if (i >= obstacles_.size())
    throw config_error(fmt::format("obstacle index {} out of range (have {})",
                                   i + 1, obstacles_.size()));
}

BoundaryJet DeformationFamily::eval_jet(std::size_t i, double u, double alpha,
                                        int max_u, int max_alpha) const {
  check_index(i);
  check_alpha(alpha);
  if (max_u < 0 || max_alpha < 0 || max_u > smoothness_.r ||
      max_alpha > smoothness_.r_alpha)
    throw config_error(fmt::format(
        "jet order ({}, {}) exceeds declared smoothness C^({}, {})", max_u,
        max_alpha, smoothness_.r, smoothness_.r_alpha));

  const ObstacleSpec& ob = obstacles_[i];
  const Series cx = ob.center_x.taylor(alpha, max_alpha);
  const Series cy = ob.center_y.taylor(alpha, max_alpha);
  const Series a = ob.semi_a.taylor(alpha, max_alpha);
  const Series b = ob.semi_b.taylor(alpha, max_alpha);
  Series s, c;
  series_sincos(ob.rotation.taylor(alpha, max_alpha), s, c);
  // x = cx + (a cos t) cos u - (b sin t) sin u
  // y = cy + (a sin t) cos u + (b cos t) sin u
  const Series acos_t = series_mul(a, c);
  const Series bsin_t = series_mul(b, s);
  const Series asin_t = series_mul(a, s);
  const Series bcos_t = series_mul(b, c);

  BoundaryJet jet(max_u, max_alpha);
  for (int la = 0; la <= max_alpha; ++la) {
    const auto k = static_cast<std::size_t>(la);
    const double f = factorial(la);
    for (int lu = 0; lu <= max_u; ++lu) {
      const double cu = dcos(u, lu), su = dsin(u, lu);
      Vec2 v{f * (acos_t[k] * cu - bsin_t[k] * su),
             f * (asin_t[k] * cu + bcos_t[k] * su)};
      if (lu == 0) v += f * Vec2{cx[k], cy[k]};
      jet(lu, la) = v;
    }
  }
  return jet;
}

Vec2 DeformationFamily::point(std::size_t i, double u, double alpha) const {
  return eval_jet(i, u, alpha, 0, 0)(0, 0);
}

Vec2 DeformationFamily::tangent(std::size_t i, double u, double alpha) const {
  return eval_jet(i, u, alpha, 1, 0)(1, 0);
}

// --- Derived quantities -----------------------------------------------------

double curvature_from_jet(const BoundaryJet& jet) {
  const Vec2& d1 = jet(1, 0);
  const Vec2& d2 = jet(2, 0);
  const double speed = d1.norm();
  return cross(d1, d2) / (speed * speed * speed);
}

double curvature(const DeformationFamily& family, std::size_t i, double u,
                 double alpha) {
  const double kappa = curvature_from_jet(family.eval_jet(i, u, alpha, 2, 0));
  if (!(kappa > DeformationFamily::kKappaFloor))
    throw config_error(fmt::format(
        "strict convexity violated: obstacle {} has curvature {} at u = {}, "
        "alpha = {}",
        i + 1, kappa, u, alpha));
  return kappa;
}

double perimeter(const DeformationFamily& family, std::size_t i, double alpha) {
  family.check_index(i);
  family.check_alpha(alpha);
  auto speed = [&](double u) { return family.tangent(i, u, alpha).norm(); };
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 61>;
  return Integrator::integrate(speed, 0.0, 2.0 * std::numbers::pi, 15, 1e-12);
}

Vec2 outward_normal(const DeformationFamily& family, std::size_t i, double u,
                    double alpha) {
  const Vec2 t = family.tangent(i, u, alpha);
  const double len = t.norm();
  if (!(len > 0.0))
    throw config_error(fmt::format(
        "degenerate parametrization: zero tangent on obstacle {} at u = {}",
        i + 1, u));
  return Vec2{t.y(), -t.x()} / len;
}

double distance_to_obstacle(const DeformationFamily& family, std::size_t i,
                            double alpha, const Vec2& p) {
  family.check_index(i);
  const ObstacleSpec& ob = family.obstacle(i);
  const Vec2 rel = p - ob.center(alpha);
  const double a = ob.semi_a(alpha), b = ob.semi_b(alpha);
  if (ob.kind == ObstacleKind::circle || a == b)
    return std::max(0.0, rel.norm() - a);
  const double th = ob.rotation(alpha);
  const double ct = std::cos(th), st = std::sin(th);
  double x = std::abs(ct * rel.x() + st * rel.y());
  double y = std::abs(-st * rel.x() + ct * rel.y());
  if ((x / a) * (x / a) + (y / b) * (y / b) <= 1.0) return 0.0;
  if (a >= b) return ellipse_distance_first_quadrant(a, b, x, y);
  return ellipse_distance_first_quadrant(b, a, y, x);
}

double segment_distance_to_obstacle(const DeformationFamily& family,
                                    std::size_t i, double alpha, const Vec2& a,
                                    const Vec2& b) {
  const ObstacleSpec& ob = family.obstacle(i);
  const Vec2 c = ob.center(alpha);
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t_star =
      len2 > 0.0 ? std::clamp((c - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  const double center_dist = (a + t_star * ab - c).norm();
  const double ra = ob.semi_a(alpha), rb = ob.semi_b(alpha);
  if (ob.kind == ObstacleKind::circle || ra == rb)
    return std::max(0.0, center_dist - ra);
  const double r_in = std::min(ra, rb);
  if (center_dist <= r_in) return 0.0;
  // Distance to a convex set is convex along the segment: golden section.
  auto f = [&](double t) {
    return distance_to_obstacle(family, i, alpha, a + t * ab);
  };
  constexpr double inv_phi = 0.6180339887498949;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    if (f1 < f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - inv_phi * (hi - lo); f1 = f(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + inv_phi * (hi - lo); f2 = f(x2);
    }
    if (std::min(f1, f2) == 0.0) return 0.0;
  }
  return std::min({f1, f2, f(0.0), f(1.0)});
}

}  // namespace billiards
