#include <cmath>
#include <numbers>

#include <doctest.h>

#include "billiards/dynamics.hpp"
#include "tables.hpp"

using namespace billiards;
using namespace billiards::test;
using std::numbers::pi;

TEST_CASE("reflection") {
  CHECK((reflect(Vec2(1, 0), Vec2(-1, 0)) - Vec2(-1, 0)).norm() < 1e-15);
  CHECK((reflect(Vec2(1, 0), Vec2(0, 1)) - Vec2(1, 0)).norm() < 1e-15);
  const double r = std::sqrt(0.5);
  CHECK((reflect(Vec2(r, -r), Vec2(0, 1)) - Vec2(r, r)).norm() < 1e-15);
  // isometry and involution for a generic normal
  const Vec2 n = Vec2(0.3, -0.8).normalized(), v = Vec2(0.6, 0.8);
  CHECK(reflect(v, n).norm() == doctest::Approx(1.0));
  CHECK((reflect(reflect(v, n), n) - v).norm() < 1e-15);
}

TEST_CASE("first intersection") {
  const auto f = two_circles();
  SUBCASE("head on") {
    const auto hit = first_intersection(Vec2(1, 0), Vec2(1, 0), f, 0.0, 0);
    REQUIRE(hit);
    CHECK(hit->obstacle == 1);
    CHECK(hit->t == doctest::Approx(2.0));
    CHECK((f.point(1, hit->u, 0.0) - Vec2(3, 0)).norm() < 1e-12);
    CHECK_FALSE(hit->grazing);
  }
  SUBCASE("escape") {
    CHECK_FALSE(first_intersection(Vec2(1, 0), Vec2(0, 1), f, 0.0, 0));
  }
  SUBCASE("backwards") {
    const auto hit = first_intersection(Vec2(3, 0), Vec2(-1, 0), f, 0.0, 1);
    REQUIRE(hit);
    CHECK(hit->obstacle == 0);
    CHECK(hit->t == doctest::Approx(2.0));
    CHECK((f.point(0, hit->u, 0.0) - Vec2(1, 0)).norm() < 1e-12);
  }
  SUBCASE("tangent ray is flagged") {
    const auto hit = first_intersection(Vec2(2, 1), Vec2(1, 0), f, 0.0);
    REQUIRE(hit);
    CHECK(hit->grazing);
    CHECK_THROWS_AS(billiard_step(PhaseState{0, pi / 2, Vec2(1, 0), 0.0}, f), Error);
  }
  SUBCASE("ellipse hit against bisection along the ray") {
    const auto e = single_ellipse(2, 1);
    const Vec2 q(-5, 0.4), v = Vec2(1, 0.05).normalized();
    const auto hit = first_intersection(q, v, e, 0.0);
    REQUIRE(hit);
    CHECK(hit->obstacle == 0);
    double lo = 0, hi = 5;  // inside test x^2/4 + y^2 < 1 changes sign once
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const Vec2 p = q + mid * v;
      (p.x() * p.x() / 4 + p.y() * p.y() < 1 ? hi : lo) = mid;
    }
    CHECK(hit->t == doctest::Approx(lo).epsilon(1e-12));
  }
}

TEST_CASE("billiard step") {
  const auto f = two_circles();
  const PhaseState s{0, 0.0, Vec2(1, 0), 0.0};
  const auto next = billiard_step(s, f);
  REQUIRE(next);
  CHECK(next->obstacle == 1);
  CHECK((f.point(1, next->u, 0.0) - Vec2(3, 0)).norm() < 1e-12);
  CHECK((next->direction - Vec2(-1, 0)).norm() < 1e-12);
  CHECK_FALSE(billiard_step(PhaseState{0, pi / 2, Vec2(0, 1), 0.0}, f));

  SUBCASE("three circles: normal hit on the nearest point") {
    const auto t = three_circles();
    const auto hit = billiard_step(PhaseState{0, 0.0, Vec2(1, 0), 0.0}, t);
    REQUIRE(hit);
    CHECK(hit->obstacle == 1);
    const ReflectionRecord r = make_record(t, *hit);
    CHECK(r.phi == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((r.point - Vec2(5, 0)).norm() < 1e-12);
  }
}

TEST_CASE("trajectory") {
  const auto f = two_circles();
  SUBCASE("period two") {
    const Trajectory tr = trajectory(PhaseState{0, 0.0, Vec2(1, 0), 0.0}, f, 10);
    CHECK(tr.status == TrajectoryStatus::complete);
    REQUIRE(tr.records.size() == 11);
    for (std::size_t j = 0; j < tr.records.size(); ++j) {
      CHECK(tr.records[j].obstacle == j % 2);
      CHECK(tr.records[j].phi == doctest::Approx(0.0).epsilon(1e-12));
      if (j + 1 < tr.records.size()) CHECK(*tr.records[j].d == doctest::Approx(2.0));
    }
  }
  SUBCASE("off-axis aim escapes") {
    const Vec2 v = Vec2(1, 0.05).normalized();
    const Trajectory tr = trajectory(PhaseState{0, 0.0, v, 0.0}, f, 100);
    CHECK(tr.status == TrajectoryStatus::escaped);
    CHECK(tr.records.size() < 100);
  }
  SUBCASE("unit speed: t increments are the flight lengths") {
    const auto t = three_circles();
    const Vec2 v = Vec2(1, 0.05).normalized();
    const Trajectory tr = trajectory(PhaseState{0, 0.05, v, 0.0}, t, 20);
    REQUIRE(tr.records.size() >= 2);
    for (std::size_t j = 0; j + 1 < tr.records.size(); ++j) {
      const auto& a = tr.records[j];
      const auto& b = tr.records[j + 1];
      CHECK(std::abs(b.t - a.t - *a.d) < 1e-10);
      CHECK(std::abs((b.point - a.point).norm() - *a.d) < 1e-10);
      // the recorded angle matches the outgoing direction
      const Vec2 n = outward_normal(t, b.obstacle, b.u, 0.0);
      CHECK(std::cos(b.phi) == doctest::Approx(n.dot(b.direction)));
    }
  }
}
