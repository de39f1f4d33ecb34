#pragma once

#include <optional>
#include <vector>

#include "billiards/bounds.hpp"
#include "billiards/orbit.hpp"

namespace billiards {

/// Front curvatures k_j just after each reflection and the contraction
/// factors delta_j = 1/(1 + d_j k_j) of the following flight.
struct CurvatureTrace {
  std::vector<double> k;
  std::vector<double> delta;
  double seed_k0 = 0.0;
};

struct KdotTrace {
  std::vector<double> k_dot;
  std::vector<double> beta;     // 1/(1 + d_j k_j)^2
  std::vector<double> forcing;  // -d'_j k_j^2 beta_j + g'_{j+1}
};

struct FDerivative {
  std::vector<double> f_dot;
  double F_m = 0.0;
};

struct LyapunovReport {
  double lambda_m = 0.0;
  std::size_t m = 0;
  std::size_t burn_in = 0;
  double k0 = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double seed_sensitivity = 0.0;
  std::optional<double> F_m;
  std::optional<double> oracle_lambda;
  std::vector<std::pair<std::size_t, double>> convergence;  // (prefix m, lambda)
};

/// Number of flights with a known length: the period for periodic orbits,
/// otherwise the records that have a successor.
std::size_t flight_count(const BilliardOrbit& orbit);

/// k_{j+1} = k_j/(1 + d_j k_j) + 2 kappa_{j+1}/cos(phi_{j+1}), from k_0 = k0.
/// Periodic orbits are unrolled for `steps` flights (default one period);
/// segments use every flight available.
CurvatureTrace propagate_curvature(const BilliardOrbit& orbit, double k0,
                                   std::size_t steps = 0);

/// Free-flight decay k/(1 + elapsed k).
double curvature_between(double k, double elapsed);

/// Fixed point of the one-period composition, listed at every vertex.
std::vector<double> periodic_curvature_fixed_point(const BilliardOrbit& orbit);

/// Mean of log(1 + d_j k_j) over flights burn_in .. m-1 of `trace`.
double lyapunov_from_trace(const CurvatureTrace& trace, std::size_t burn_in,
                           std::size_t m);

/// Default seed: twice the curvature at the first reflection.
double default_seed(const BilliardOrbit& orbit);

/// Exponent estimate for an orbit. Periodic orbits use the curvature fixed
/// point (burn-in ignored); segments propagate from k0 (default seed when
/// absent) and average after burn_in. `steps` overrides the number of
/// averaged flights for periodic orbits.
LyapunovReport lyapunov_estimate(const BilliardOrbit& orbit,
                                 const TableBounds& bounds,
                                 std::optional<double> k0 = {},
                                 std::size_t burn_in = 10,
                                 std::size_t steps = 0);

/// Linearized recursion for dk_j/dalpha. Periodic orbits close the recursion
/// exactly; segments start from 0.
KdotTrace kdot_trace(const BilliardOrbit& orbit, const CurvatureTrace& trace,
                     const AlphaDerivatives& derivs);

/// f'_j = (d'_j k_j + d_j k'_j)/(1 + d_j k_j) and their mean after burn_in.
FDerivative f_derivative_sum(const BilliardOrbit& orbit,
                             const CurvatureTrace& trace,
                             const AlphaDerivatives& derivs,
                             const KdotTrace& kdot, std::size_t burn_in = 0);

/// Independent exponent estimate from the finite-difference linearization of
/// the billiard map in (u, tangential velocity) coordinates. Periodic orbits
/// report the top eigenvalue of the monodromy per reflection; segments report
/// the growth of the front started at k0 between reflection burn_in and the
/// end of the orbit.
double jacobian_lyapunov_oracle(const BilliardOrbit& orbit,
                                const DeformationFamily& family, double h,
                                std::optional<double> k0 = {},
                                std::size_t burn_in = 10);

struct FrontCheck {
  std::size_t m = 0;
  double epsilon = 0.0;
  double measured = 0.0;   // separation growth of the two-ray pencil
  double predicted = 0.0;  // product of 1/delta_j
  double ratio = 0.0;
};

/// Launches a symmetric two-ray pencil realizing the convex front of
/// curvature trace.seed_k0 from the middle of the first flight, rescales it to
/// half-width epsilon after every reflection, and compares the accumulated
/// width growth over m reflections with the delta product of `trace`.
FrontCheck front_expansion_check(const BilliardOrbit& orbit,
                                 const CurvatureTrace& trace,
                                 const DeformationFamily& family,
                                 std::size_t m, double epsilon = 1e-6);

}  // namespace billiards
