#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "billiards/error.hpp"

namespace billiards {

using Vec2 = Eigen::Vector2d;

/// Rotate by +90 degrees.
inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }
inline double cross(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Real polynomial in the deformation parameter, coefficients in increasing
/// degree.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs) {}
  explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

  double operator()(double x) const { return derivative(x, 0); }
  double derivative(double x, int order) const;
  /// Taylor coefficients p^(k)(x)/k! for k = 0..n.
  std::vector<double> taylor(double x, int n) const;
  int degree() const;
  bool is_constant() const { return degree() <= 0; }
  const std::vector<double>& coefficients() const { return coeffs_; }

 private:
  std::vector<double> coeffs_;
};

enum class ObstacleKind { circle, ellipse };

/// One deformable obstacle. A circle is stored as an ellipse with equal
/// semi-axes and zero rotation; the boundary is
///   phi(u, a) = c(a) + Rot(theta(a)) (A(a) cos u, B(a) sin u),
/// counterclockwise in u.
struct ObstacleSpec {
  ObstacleKind kind = ObstacleKind::circle;
  Polynomial center_x;
  Polynomial center_y;
  Polynomial semi_a;
  Polynomial semi_b;
  Polynomial rotation;

  static ObstacleSpec circle(Polynomial cx, Polynomial cy, Polynomial radius);
  static ObstacleSpec ellipse(Polynomial cx, Polynomial cy, Polynomial a,
                              Polynomial b, Polynomial rotation);

  Vec2 center(double alpha) const { return {center_x(alpha), center_y(alpha)}; }
  int max_degree() const;
};

/// Declared regularity: C^r in the boundary parameter, C^{r'} in alpha.
struct Smoothness {
  int r = 5;
  int r_alpha = 3;
};

/// All mixed partials d^l/du^l d^l'/dalpha^l' of one boundary point.
class BoundaryJet {
 public:
  BoundaryJet(int max_u, int max_alpha)
      : max_u_(max_u), max_alpha_(max_alpha),
        data_(static_cast<std::size_t>((max_u + 1) * (max_alpha + 1)),
              Vec2::Zero()) {}

  const Vec2& operator()(int lu, int la) const { return data_[index(lu, la)]; }
  Vec2& operator()(int lu, int la) { return data_[index(lu, la)]; }
  int max_u() const { return max_u_; }
  int max_alpha() const { return max_alpha_; }

 private:
  std::size_t index(int lu, int la) const {
    return static_cast<std::size_t>(la * (max_u_ + 1) + lu);
  }
  int max_u_;
  int max_alpha_;
  std::vector<Vec2> data_;
};

/// The parametrized obstacle set K(alpha), alpha in [0, b]. Immutable after
/// construction; every query is a pure function.
class DeformationFamily {
 public:
  /// Curvature below this is treated as a strict-convexity violation.
  static constexpr double kKappaFloor = 1e-6;

  DeformationFamily(std::vector<ObstacleSpec> obstacles, double alpha_max,
                    Smoothness smoothness, bool period_two_mode);

  std::size_t size() const { return obstacles_.size(); }
  const ObstacleSpec& obstacle(std::size_t i) const { return obstacles_.at(i); }
  const std::vector<ObstacleSpec>& obstacles() const { return obstacles_; }
  double alpha_max() const { return alpha_max_; }
  Smoothness smoothness() const { return smoothness_; }
  bool period_two_mode() const { return period_two_mode_; }

  /// Alpha values slightly outside [0, b] are accepted so that centered
  /// finite differences exist at the interval ends.
  double alpha_margin() const;
  void check_alpha(double alpha) const;
  void check_index(std::size_t i) const;

  BoundaryJet eval_jet(std::size_t i, double u, double alpha, int max_u,
                       int max_alpha) const;
  Vec2 point(std::size_t i, double u, double alpha) const;
  Vec2 tangent(std::size_t i, double u, double alpha) const;

 private:
  std::vector<ObstacleSpec> obstacles_;
  double alpha_max_;
  Smoothness smoothness_;
  bool period_two_mode_;
};

/// Signed curvature (x'y'' - y'x'')/|phi'|^3 from a jet with max_u >= 2.
double curvature_from_jet(const BoundaryJet& jet);

/// Curvature of boundary i at (u, alpha). Throws a config error if the value
/// falls below the strict-convexity floor.
double curvature(const DeformationFamily& family, std::size_t i, double u,
                 double alpha);

/// Arc length of boundary i at alpha, adaptive quadrature, rel. error <= 1e-10.
double perimeter(const DeformationFamily& family, std::size_t i, double alpha);

/// Unit outward normal (tangent rotated by -90 degrees).
Vec2 outward_normal(const DeformationFamily& family, std::size_t i, double u,
                    double alpha);

/// Euclidean distance from a point to the (filled) obstacle; 0 inside.
double distance_to_obstacle(const DeformationFamily& family, std::size_t i,
                            double alpha, const Vec2& p);

/// Distance from the segment [a, b] to the filled obstacle; 0 on contact.
double segment_distance_to_obstacle(const DeformationFamily& family,
                                    std::size_t i, double alpha, const Vec2& a,
                                    const Vec2& b);

enum class Execution { serial, parallel };

struct EclipseWitness {
  std::size_t i, j, k;  // j is the obstacle touched by a segment from i to k
  Vec2 from, to;
};

struct NoEclipseCertificate {
  bool holds = true;
  std::optional<EclipseWitness> witness;
};

/// Sampled no-eclipse test: every segment between n_samples boundary points
/// of K_i and of K_k must stay farther than margin from every third K_j.
/// Triples are scanned in lexicographic (i, j, k) order with i < k and the
/// first violation is reported.
NoEclipseCertificate check_no_eclipse(const DeformationFamily& family,
                                      double alpha, int n_samples,
                                      double margin,
                                      Execution exec = Execution::parallel);

/// Validation sweep over an alpha grid: positive axes, curvature floor, and
/// condition (H). Throws Error(config) or Error(no_eclipse) with context.
void validate_family(const DeformationFamily& family, int alpha_points,
                     int u_points);

}  // namespace billiards
