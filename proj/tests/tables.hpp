#pragma once

#include <cmath>
#include <string>

#include "billiards/geometry.hpp"

namespace billiards::test {

inline const std::string kConfigDir = BILLIARDS_CONFIG_DIR;

inline DeformationFamily two_circles(double b = 0.5) {
  return DeformationFamily({ObstacleSpec::circle({0}, {0}, {1}),
                            ObstacleSpec::circle({4}, {0}, {1})},
                           b, {}, true);
}

// second circle at (4 + alpha, 0)
inline DeformationFamily translate_family(double b = 0.5) {
  return DeformationFamily({ObstacleSpec::circle({0}, {0}, {1}),
                            ObstacleSpec::circle({4, 1}, {0}, {1})},
                           b, {}, true);
}

// both radii 1 + alpha
inline DeformationFamily grow_family(double b = 0.5) {
  return DeformationFamily({ObstacleSpec::circle({0}, {0}, {1, 1}),
                            ObstacleSpec::circle({4}, {0}, {1, 1})},
                           b, {}, true);
}

inline DeformationFamily three_circles(double b = 0.5) {
  return DeformationFamily({ObstacleSpec::circle({0}, {0}, {1}),
                            ObstacleSpec::circle({6}, {0}, {1}),
                            ObstacleSpec::circle({3}, {3 * std::sqrt(3.0)}, {1})},
                           b, {}, false);
}

// the deformation shipped in three_circles.cfg
inline DeformationFamily three_circles_moving(double b = 0.5) {
  return DeformationFamily(
      {ObstacleSpec::circle({0}, {0}, {1, 0.5}), ObstacleSpec::circle({6}, {0}, {1}),
       ObstacleSpec::circle({3}, {3 * std::sqrt(3.0), 1}, {1})},
      b, {}, false);
}

// the flat ellipse hangs 0.8 above the hull of the two circles; its bounding
// disk overlaps the hull, so the sampled scan has to decide
inline DeformationFamily near_miss() {
  return DeformationFamily({ObstacleSpec::circle({0}, {0}, {1}),
                            ObstacleSpec::circle({4}, {0}, {1}),
                            ObstacleSpec::ellipse({2}, {2.3, -1}, {1.5}, {0.5}, {0})},
                           0.5, {}, false);
}

inline DeformationFamily collinear_circles() {
  return DeformationFamily({ObstacleSpec::circle({0}, {0}, {1}),
                            ObstacleSpec::circle({4}, {0}, {1}),
                            ObstacleSpec::circle({8}, {0}, {1})},
                           0.1, {}, false);
}

// obstacle 1 is an ellipse at the origin; two far circles complete the table
inline DeformationFamily single_ellipse(double a = 2, double b = 1) {
  return DeformationFamily({ObstacleSpec::ellipse({0}, {0}, {a}, {b}, {0}),
                            ObstacleSpec::circle({10}, {0}, {1}),
                            ObstacleSpec::circle({5}, {10}, {1})},
                           0.1, {}, false);
}

}  // namespace billiards::test
