#pragma once

#include <optional>
#include <vector>

#include "billiards/geometry.hpp"

namespace billiards {

/// |<v, n>| below this at impact is a grazing hit.
inline constexpr double kGrazingTolerance = 1e-9;

/// Phase point just after a reflection: boundary parameter on an obstacle and
/// the outgoing unit velocity.
struct PhaseState {
  std::size_t obstacle = 0;
  double u = 0.0;
  Vec2 direction = Vec2::UnitX();
  double alpha = 0.0;
};

struct ReflectionRecord {
  std::size_t obstacle = 0;
  double u = 0.0;
  Vec2 point = Vec2::Zero();
  Vec2 direction = Vec2::UnitX();  // outgoing
  double t = 0.0;                  // cumulative flight length
  std::optional<double> d;         // flight length to the next reflection
  double phi = 0.0;                // angle between outward normal and outgoing ray
  double kappa = 0.0;
};

/// Specular reflection v - 2<v, n> n.
Vec2 reflect(const Vec2& v, const Vec2& n);

struct RayHit {
  std::size_t obstacle = 0;
  double u = 0.0;
  double t = 0.0;
  bool grazing = false;
};

/// First boundary hit of the ray q + t v with t > t_floor. The obstacle
/// `exclude` (the one the ray departs from) is skipped. Empty on escape.
std::optional<RayHit> first_intersection(const Vec2& q, const Vec2& v,
                                         const DeformationFamily& family,
                                         double alpha,
                                         std::optional<std::size_t> exclude = {},
                                         double t_floor = 1e-9);

/// One application of the billiard ball map. Empty on escape; throws a
/// grazing error on tangential impact.
std::optional<PhaseState> billiard_step(const PhaseState& state,
                                        const DeformationFamily& family,
                                        double t_floor = 1e-9);

enum class TrajectoryStatus { complete, escaped, grazing };

struct Trajectory {
  std::vector<ReflectionRecord> records;  // records[0] is the initial state
  TrajectoryStatus status = TrajectoryStatus::complete;
};

/// Iterates the map m times from `state`; stops early on escape or grazing.
Trajectory trajectory(const PhaseState& state, const DeformationFamily& family,
                      int m, double t_floor = 1e-9);

/// Fills a record's geometry (point, normal angle, curvature) for a phase
/// state; d and t are left to the caller.
ReflectionRecord make_record(const DeformationFamily& family,
                             const PhaseState& state);

}  // namespace billiards
