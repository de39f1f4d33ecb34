#pragma once

#include <optional>
#include <string>
#include <vector>

#include "billiards/config.hpp"
#include "billiards/lyapunov.hpp"

namespace billiards {

/// Solves `word` at alpha, warm-started from `warm` when given. Cyclic words
/// give periodic orbits, open words padded segments.
BilliardOrbit solve_word(const Word& word, const LabConfig& config, double alpha,
                         const BilliardOrbit* warm = nullptr);

/// Exponent of an orbit: curvature fixed point for periodic orbits, default
/// seed with burn-in for segments.
double orbit_lambda(const BilliardOrbit& orbit, std::size_t burn_in);

/// Exponent, alpha-derivatives and the derivative estimate F_m of one orbit.
struct OrbitAnalysis {
  BilliardOrbit orbit;
  CurvatureTrace trace;
  LyapunovReport report;
  AlphaDerivatives derivs;
  KdotTrace kdot;
  FDerivative f;
};

OrbitAnalysis analyze_orbit(const BilliardOrbit& orbit, const LabConfig& config,
                            const TableBounds& bounds);

/// Table bounds at each alpha; phi_max sampling includes the config words.
std::vector<TableBounds> grid_bounds(const LabConfig& config,
                                     const std::vector<double>& alphas,
                                     Execution exec = Execution::parallel);

struct SweepRow {
  double alpha = 0.0;
  std::string word_id;
  std::size_t m = 0;
  double lambda_m = 0.0;
  double F_m = 0.0;
  double fd_slope = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double max_udot = 0.0;
  double max_kdot = 0.0;
  double residual = 0.0;
  double cond = 0.0;
  // not emitted in sweep.csv
  double max_ddot = 0.0;
  double max_fdot = 0.0;
};

struct SweepFailure {
  std::string word_id;
  double alpha = 0.0;
  std::string reason;
};

/// Observed constants and the continuity-modulus check
///   |lambda(alpha) - lambda(alpha_0)| <= C0 (alpha - alpha_0)(C_d k_max + C_k d_max)
/// with C0 = 1/(1 + d_min k_min) and table constants taken over the grid.
struct ContinuitySummary {
  double d_min = 0.0, d_max = 0.0, k_min = 0.0, k_max = 0.0;
  double C0 = 0.0;
  double C_d_obs = 0.0;
  double C_k_obs = 0.0;
  double C_u_obs = 0.0;
  double C1_obs = 0.0;  // max |f'_j|
  std::size_t rows_checked = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max lhs / rhs over rows with alpha > alpha_0
};

struct SweepResult {
  std::vector<double> alphas;
  std::vector<TableBounds> bounds;
  std::vector<SweepRow> rows;  // sorted by (word_id, alpha)
  std::vector<SweepFailure> failures;
  ContinuitySummary summary;
};

/// Continuation sweep of every config word over the alpha grid. Words run in
/// parallel, each one sequentially in alpha; output order is independent of
/// scheduling.
SweepResult run_sweep(const LabConfig& config,
                      Execution exec = Execution::parallel);

ContinuitySummary continuity_summary(const std::vector<SweepRow>& rows,
                                     const std::vector<TableBounds>& bounds,
                                     const std::vector<double>& alphas);

struct DerivativeRow {
  double alpha = 0.0;
  double lambda = 0.0;
  double fd_slope = 0.0;
  double error = 0.0;  // |fd_slope - F_m|
  double bound = 0.0;  // C2_obs / 2 * alpha
};

struct DerivativeReport {
  std::string word_id;
  std::size_t m = 0;
  double lambda0 = 0.0;
  double F_m = 0.0;
  double C1_obs = 0.0;       // max |f'_j| at alpha = 0
  double C2_obs = 0.0;       // max |second difference of lambda|
  double F_bound = 0.0;      // (C_d k_max + d_max C_k)/(1 + d_min k_min)
  double fitted_K = 0.0;     // max error / alpha
  double loglog_slope = 0.0; // NaN when all errors are at rounding level
  std::vector<DerivativeRow> rows;
  bool remainder_ok = false;
  bool slope_ok = false;
  bool bound_ok = false;
};

/// Small-alpha set {1e-1, 3e-2, 1e-2, 3e-3, 1e-3} * b.
std::vector<double> small_alphas(double b);

/// Differentiability experiment at alpha = 0 for one word.
DerivativeReport run_derivative(const LabConfig& config, const WordSpec& word,
                                const TableBounds& bounds0);

}  // namespace billiards
