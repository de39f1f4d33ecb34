#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "billiards/dynamics.hpp"
#include "billiards/geometry.hpp"
#include "billiards/symbolic.hpp"

namespace billiards {

struct OrbitOptions {
  double tol_orbit = 1e-11;   // max |dL/du_j| at the solution
  double tol_shadow = 1e-9;   // core motion allowed between padding levels
  int max_iterations = 100;   // damped Newton iterations
  int descent_steps = 200;    // gradient-descent warm-up budget
  double descent_trigger = 1e-1;
  bool check_shadowing = true;
};

enum class OrbitKind { periodic, segment };

/// The vertex chain the length functional was minimized over. For a segment
/// this is the padded chain; the orbit's records cover only the core.
struct OrbitChain {
  std::vector<std::size_t> symbols;
  std::vector<double> u;
  bool cyclic = false;
  std::size_t core_begin = 0;
  std::size_t core_size = 0;
};

/// A realized itinerary: one period for periodic words, the core window for
/// segments.
struct BilliardOrbit {
  Word word;
  double alpha = 0.0;
  OrbitKind kind = OrbitKind::periodic;
  std::vector<ReflectionRecord> records;
  double residual = 0.0;
  int iterations = 0;
  OrbitChain chain;
};

/// First-order alpha-derivatives along an orbit's records.
struct AlphaDerivatives {
  std::vector<double> u_dot;
  std::vector<double> d_dot;       // NaN where the record has no successor
  std::vector<double> kappa_dot;
  std::vector<double> cosphi_dot;
  std::vector<double> g_dot;       // g = 2 kappa / cos(phi)
  double condition_number = 0.0;   // of the length Hessian
};

/// Length of the chain sum_j |q_{j+1} - q_j| with its gradient and Hessian in
/// the boundary parameters (either output may be null).
double chain_length(const DeformationFamily& family, double alpha,
                    std::span<const std::size_t> symbols,
                    std::span<const double> u, bool cyclic,
                    Eigen::VectorXd* gradient = nullptr,
                    Eigen::MatrixXd* hessian = nullptr);

/// Periodic orbit for a cyclic admissible word, as the minimizer of the
/// cyclic length functional. `init` warm-starts the boundary parameters.
BilliardOrbit find_periodic_orbit(const Word& word,
                                  const DeformationFamily& family, double alpha,
                                  const OrbitOptions& options = {},
                                  std::span<const double> init = {});

/// Finite orbit segment shadowing an open word: the word is padded on both
/// sides with the smallest admissible symbols, the open chain is minimized
/// with free ends, and the core is returned. For padding >= 8 the core is
/// compared against the padding - 4 solution.
BilliardOrbit find_orbit_segment(const Word& word,
                                 const DeformationFamily& family, double alpha,
                                 int padding, const OrbitOptions& options = {},
                                 std::span<const double> init = {});

/// Same word at a new alpha, warm-started from `orbit`.
BilliardOrbit continue_orbit(const BilliardOrbit& orbit,
                             const DeformationFamily& family, double alpha,
                             const OrbitOptions& options = {});

/// Obstacle indices read off the records.
Word read_itinerary(const BilliardOrbit& orbit);

/// Implicit-function derivatives: H du/dalpha = -d(grad L)/dalpha at the
/// critical point, then chain rule for d, kappa, cos(phi) and g.
AlphaDerivatives orbit_alpha_derivatives(const BilliardOrbit& orbit,
                                         const DeformationFamily& family);

}  // namespace billiards
