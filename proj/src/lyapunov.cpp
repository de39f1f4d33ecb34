#include "billiards/lyapunov.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace billiards {
namespace {

const ReflectionRecord& record_at(const BilliardOrbit& orbit, std::size_t j) {
  const auto& r = orbit.records;
  return orbit.kind == OrbitKind::periodic ? r[j % r.size()] : r.at(j);
}

double kick(const ReflectionRecord& r) {
  const double c = std::cos(r.phi);
  if (c < kGrazingTolerance)
    throw grazing_error(fmt::format(
        "grazing record on obstacle {} (cos phi = {:.3e})", r.obstacle + 1, c));
  return 2.0 * r.kappa / c;
}

double flight(const ReflectionRecord& r) {
  if (!r.d) throw solver_error("record without a successor used as a flight");
  return *r.d;
}

std::vector<std::size_t> prefix_lengths(std::size_t burn_in, std::size_t total) {
  std::vector<std::size_t> out;
  for (std::size_t len = 1; burn_in + len < total; len *= 2)
    out.push_back(burn_in + len);
  out.push_back(total);
  return out;
}

}  // namespace

std::size_t flight_count(const BilliardOrbit& orbit) {
  if (orbit.kind == OrbitKind::periodic) return orbit.records.size();
  std::size_t n = 0;
  while (n < orbit.records.size() && orbit.records[n].d) ++n;
  return n;
}

CurvatureTrace propagate_curvature(const BilliardOrbit& orbit, double k0,
                                   std::size_t steps) {
  if (!(k0 > 0.0)) throw config_error("curvature seed k0 must be positive");
  const bool periodic = orbit.kind == OrbitKind::periodic;
  std::size_t flights = flight_count(orbit);
  if (steps) {
    if (!periodic && steps > flights)
      throw config_error(fmt::format(
          "segment has {} flights, {} requested", flights, steps));
    flights = steps;
  }
  CurvatureTrace tr;
  tr.seed_k0 = k0;
  tr.k.reserve(flights + 1);
  tr.delta.reserve(flights);
  double k = k0;
  tr.k.push_back(k);
  for (std::size_t j = 0; j < flights; ++j) {
    const double delta = 1.0 / (1.0 + flight(record_at(orbit, j)) * k);
    tr.delta.push_back(delta);
    if (!periodic && j + 1 >= orbit.records.size()) break;
    k = k * delta + kick(record_at(orbit, j + 1));
    tr.k.push_back(k);
  }
  return tr;
}

double curvature_between(double k, double elapsed) {
  return k / (1.0 + elapsed * k);
}

std::vector<double> periodic_curvature_fixed_point(const BilliardOrbit& orbit) {
  if (orbit.kind != OrbitKind::periodic)
    throw config_error("curvature fixed point needs a periodic orbit");
  const std::size_t n = orbit.records.size();
  double k = kick(orbit.records[0]);
  for (int it = 0; it < 100000; ++it) {
    double next = k;
    for (std::size_t j = 0; j < n; ++j)
      next = curvature_between(next, flight(orbit.records[j])) +
             kick(orbit.records[(j + 1) % n]);
    const double change = std::abs(next - k);
    k = next;
    if (change < 1e-13) break;
  }
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = k;
    k = curvature_between(k, flight(orbit.records[j])) +
        kick(orbit.records[(j + 1) % n]);
  }
  return out;
}

double lyapunov_from_trace(const CurvatureTrace& trace, std::size_t burn_in,
                           std::size_t m) {
  if (m > trace.delta.size() || m <= burn_in)
    throw config_error(fmt::format(
        "cannot average flights {}..{} of a trace with {} flights", burn_in, m,
        trace.delta.size()));
  double sum = 0.0;
  for (std::size_t j = burn_in; j < m; ++j) sum -= std::log(trace.delta[j]);
  return sum / static_cast<double>(m - burn_in);
}

double default_seed(const BilliardOrbit& orbit) {
  return 2.0 * orbit.records.at(0).kappa;
}

LyapunovReport lyapunov_estimate(const BilliardOrbit& orbit,
                                 const TableBounds& bounds,
                                 std::optional<double> k0, std::size_t burn_in,
                                 std::size_t steps) {
  LyapunovReport rep;
  std::tie(rep.lower_bound, rep.upper_bound) = lyapunov_bounds(bounds);
  if (orbit.kind == OrbitKind::periodic) {
    const std::size_t n = orbit.records.size();
    const std::size_t flights = steps ? steps : n;
    rep.k0 = periodic_curvature_fixed_point(orbit)[0];
    rep.burn_in = 0;
    rep.m = flights;
    const CurvatureTrace tr = propagate_curvature(orbit, rep.k0, flights);
    rep.lambda_m = lyapunov_from_trace(tr, 0, flights);
    for (std::size_t len : prefix_lengths(0, flights))
      rep.convergence.emplace_back(len, lyapunov_from_trace(tr, 0, len));
    // seed effect over a long unrolled window
    const std::size_t window = std::max<std::size_t>(flights, 40);
    const std::size_t skip = 10;
    const double a = lyapunov_from_trace(
        propagate_curvature(orbit, bounds.k_min, window), skip, window);
    const double b = lyapunov_from_trace(
        propagate_curvature(orbit, bounds.k_max, window), skip, window);
    rep.seed_sensitivity = std::abs(a - b);
    return rep;
  }

  const std::size_t flights = flight_count(orbit);
  if (flights <= burn_in)
    throw config_error(fmt::format(
        "orbit has {} flights, not more than burn_in = {}", flights, burn_in));
  rep.k0 = k0 ? *k0 : default_seed(orbit);
  rep.burn_in = burn_in;
  rep.m = flights;
  const CurvatureTrace tr = propagate_curvature(orbit, rep.k0);
  rep.lambda_m = lyapunov_from_trace(tr, burn_in, flights);
  for (std::size_t len : prefix_lengths(burn_in, flights))
    rep.convergence.emplace_back(len, lyapunov_from_trace(tr, burn_in, len));
  const double a = lyapunov_from_trace(propagate_curvature(orbit, bounds.k_min),
                                       burn_in, flights);
  const double b = lyapunov_from_trace(propagate_curvature(orbit, bounds.k_max),
                                       burn_in, flights);
  rep.seed_sensitivity = std::abs(a - b);
  return rep;
}

KdotTrace kdot_trace(const BilliardOrbit& orbit, const CurvatureTrace& trace,
                     const AlphaDerivatives& derivs) {
  const std::size_t n = orbit.records.size();
  if (derivs.d_dot.size() != n || derivs.g_dot.size() != n)
    throw config_error(fmt::format(
        "derivative data has {} entries for an orbit of {} records",
        derivs.d_dot.size(), n));
  const bool periodic = orbit.kind == OrbitKind::periodic;
  const std::size_t flights = trace.delta.size();
  KdotTrace out;
  out.beta.resize(flights);
  out.forcing.resize(flights);
  for (std::size_t j = 0; j < flights; ++j) {
    const std::size_t r = periodic ? j % n : j;
    const double b = trace.delta[j] * trace.delta[j];
    out.beta[j] = b;
    double f = -derivs.d_dot[r] * trace.k[j] * trace.k[j] * b;
    if (j + 1 < trace.k.size()) f += derivs.g_dot[periodic ? (j + 1) % n : j + 1];
    out.forcing[j] = f;
  }

  double kd0 = 0.0;
  if (periodic) {
    // geometric-series closure over one period
    double acc = 0.0, prod = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc = out.beta[i] * acc + out.forcing[i];
      prod *= out.beta[i];
    }
    kd0 = acc / (1.0 - prod);
  }
  out.k_dot.reserve(trace.k.size());
  out.k_dot.push_back(kd0);
  for (std::size_t j = 0; j + 1 < trace.k.size(); ++j)
    out.k_dot.push_back(out.beta[j] * out.k_dot[j] + out.forcing[j]);
  return out;
}

FDerivative f_derivative_sum(const BilliardOrbit& orbit,
                             const CurvatureTrace& trace,
                             const AlphaDerivatives& derivs,
                             const KdotTrace& kdot, std::size_t burn_in) {
  const std::size_t n = orbit.records.size();
  const bool periodic = orbit.kind == OrbitKind::periodic;
  const std::size_t flights = std::min(trace.delta.size(), kdot.k_dot.size());
  if (flights <= burn_in)
    throw config_error("not enough flights for the derivative average");
  FDerivative out;
  out.f_dot.resize(flights);
  double sum = 0.0;
  for (std::size_t j = 0; j < flights; ++j) {
    const std::size_t r = periodic ? j % n : j;
    const double d = flight(record_at(orbit, j));
    const double k = trace.k[j];
    out.f_dot[j] = (derivs.d_dot[r] * k + d * kdot.k_dot[j]) / (1.0 + d * k);
    if (j >= burn_in) sum += out.f_dot[j];
  }
  out.F_m = sum / static_cast<double>(flights - burn_in);
  return out;
}

}  // namespace billiards
