#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "billiards/geometry.hpp"
#include "billiards/symbolic.hpp"

namespace billiards {

struct TableBounds {
  double d_min = 0.0;
  double d_max = 0.0;        // sup of boundary-point distances over pairs
  double d_max_orbit = 0.0;  // largest d_j seen on the phi_max sampling orbits
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  double phi_max = 0.0;
  double k_min = 0.0;
  double k_max = 0.0;
};

/// Orbits used to estimate phi_max: every periodic word up to `max_period`,
/// `random_words` sampled itineraries of length `random_length`, plus any
/// caller-supplied words.
struct PhiSampling {
  std::size_t max_period = 6;
  std::size_t random_words = 100;
  std::size_t random_length = 40;
  std::uint64_t seed = 1;
  int padding = 6;
  std::span<const Word> extra_words;
};

/// Safety inflation of a sampled angle: 1 - cos is divided by 0.99.
double inflate_phi(double phi_sampled);

/// Largest reflection angle over the sampling orbits at alpha, and the
/// largest flight length seen on them.
std::pair<double, double> sample_phi_max(const DeformationFamily& family,
                                         double alpha,
                                         const PhiSampling& sampling,
                                         Execution exec = Execution::parallel);

/// Min / max distance between boundary points of obstacles i and k:
/// sampled seeding followed by Newton on the squared distance.
double boundary_distance_min(const DeformationFamily& family, std::size_t i,
                             std::size_t k, double alpha, int n_samples);
double boundary_distance_max(const DeformationFamily& family, std::size_t i,
                             std::size_t k, double alpha, int n_samples);

/// Global table constants at alpha. Throws a config error when the phi_max
/// estimate reaches pi/2.
TableBounds table_bounds(const DeformationFamily& family, double alpha,
                         int n_samples,
                         std::optional<double> phi_max_override = {},
                         const PhiSampling& sampling = {},
                         Execution exec = Execution::parallel);

/// table_bounds at every alpha of a grid. Each sampling word is continued
/// along the grid instead of being solved cold at every point.
std::vector<TableBounds> table_bounds_grid(const DeformationFamily& family,
                                           std::span<const double> alphas,
                                           int n_samples,
                                           std::optional<double> phi_max_override = {},
                                           const PhiSampling& sampling = {},
                                           Execution exec = Execution::parallel);

/// (log(1 + d_min k_min), log(1 + d_max k_max)).
std::pair<double, double> lyapunov_bounds(const TableBounds& bounds);

}  // namespace billiards
