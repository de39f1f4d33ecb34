#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "billiards/orbit.hpp"

namespace billiards {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::size_t next_index(std::size_t j, std::size_t n, bool cyclic) {
  if (j + 1 < n) return j + 1;
  return cyclic ? 0 : n;
}

double max_abs(const VectorXd& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

// Boundary parameter whose outward normal points along `w`.
double facing_parameter(const ObstacleSpec& ob, double alpha, const Vec2& w) {
  const double th = ob.rotation(alpha);
  const double ct = std::cos(th), st = std::sin(th);
  const double wx = ct * w.x() + st * w.y();
  const double wy = -st * w.x() + ct * w.y();
  // normal of (a cos u, b sin u) is proportional to (b cos u, a sin u)
  return std::atan2(wy / ob.semi_a(alpha), wx / ob.semi_b(alpha));
}

std::vector<double> seed_chain(const DeformationFamily& family, double alpha,
                               std::span<const std::size_t> symbols,
                               bool cyclic) {
  const std::size_t n = symbols.size();
  std::vector<double> u(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vec2 c = family.obstacle(symbols[j]).center(alpha);
    Vec2 target = Vec2::Zero();
    int count = 0;
    if (j > 0 || cyclic) {
      target += family.obstacle(symbols[(j + n - 1) % n]).center(alpha);
      ++count;
    }
    if (j + 1 < n || cyclic) {
      target += family.obstacle(symbols[(j + 1) % n]).center(alpha);
      ++count;
    }
    const Vec2 w = count ? Vec2(target / count - c) : Vec2::UnitX();
    u[j] = facing_parameter(family.obstacle(symbols[j]), alpha, w);
  }
  return u;
}

struct SolveResult {
  std::vector<double> u;
  double residual = 0.0;
  int iterations = 0;
};

// Damped Newton (Levenberg) on grad L = 0, preceded by gradient descent when
// the seed is far from critical.
SolveResult minimize_chain(const DeformationFamily& family, double alpha,
                           std::span<const std::size_t> symbols, bool cyclic,
                           std::vector<double> u, const OrbitOptions& opt) {
  const auto n = static_cast<Eigen::Index>(u.size());
  VectorXd g(n), g_trial(n);
  MatrixXd H(n, n);
  auto length_at = [&](const std::vector<double>& x, VectorXd* grad,
                       MatrixXd* hess) {
    return chain_length(family, alpha, symbols, x, cyclic, grad, hess);
  };

  double L = length_at(u, &g, nullptr);
  double gnorm = max_abs(g);

  // Gradient descent warm-up with backtracking.
  for (int it = 0; it < opt.descent_steps && gnorm > opt.descent_trigger; ++it) {
    double step = 1.0;
    std::vector<double> trial(u.size());
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt, step *= 0.5) {
      for (std::size_t j = 0; j < u.size(); ++j)
        trial[j] = u[j] - step * g(static_cast<Eigen::Index>(j));
      const double Lt = length_at(trial, &g_trial, nullptr);
      if (Lt < L - 1e-4 * step * g.squaredNorm()) {
        u = trial;
        L = Lt;
        g = g_trial;
        moved = true;
        break;
      }
    }
    gnorm = max_abs(g);
    if (!moved) break;
  }

  double mu = 0.0;
  int polish = 0;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    L = length_at(u, &g, &H);
    gnorm = max_abs(g);
    if (gnorm <= opt.tol_orbit) {
      // a couple of extra Newton steps drive the residual to rounding level
      if (++polish > 2 || gnorm < 1e-15) break;
    }
    VectorXd dx;
    bool solved = false;
    for (int attempt = 0; attempt < 30 && !solved; ++attempt) {
      MatrixXd A = H;
      A.diagonal().array() += mu;
      Eigen::LDLT<MatrixXd> ldlt(A);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
          (ldlt.vectorD().array() > 0.0).all()) {
        dx = ldlt.solve(-g);
        solved = dx.allFinite();
      }
      if (!solved) mu = std::max(1e-8, 10.0 * mu);
    }
    if (!solved) break;
    const double big = max_abs(dx);
    if (big > 0.5) dx *= 0.5 / big;

    std::vector<double> trial(u);
    for (std::size_t j = 0; j < u.size(); ++j)
      trial[j] += dx(static_cast<Eigen::Index>(j));
    const double Lt = length_at(trial, &g_trial, nullptr);
    const double gt = max_abs(g_trial);
    if (Lt < L || gt < gnorm) {
      u = std::move(trial);
      mu = mu > 1e-12 ? 0.1 * mu : 0.0;
    } else {
      mu = std::max(1e-3, 10.0 * mu);
    }
  }
  length_at(u, &g, nullptr);
  return {std::move(u), max_abs(g), it};
}

// Fills records for chain vertices [begin, begin + count).
std::vector<ReflectionRecord> chain_records(const DeformationFamily& family,
                                            double alpha,
                                            std::span<const std::size_t> symbols,
                                            std::span<const double> u,
                                            bool cyclic, std::size_t begin,
                                            std::size_t count) {
  const std::size_t n = symbols.size();
  std::vector<Vec2> q(n), nrm(n);
  std::vector<double> kap(n);
  for (std::size_t j = 0; j < n; ++j) {
    const BoundaryJet jet = family.eval_jet(symbols[j], u[j], alpha, 2, 0);
    q[j] = jet(0, 0);
    const Vec2 t = jet(1, 0);
    nrm[j] = Vec2{t.y(), -t.x()} / t.norm();
    kap[j] = curvature_from_jet(jet);
  }
  // every chord must leave and enter through the facing sides
  const std::size_t edges = cyclic ? n : n - 1;
  for (std::size_t e = 0; e < edges; ++e) {
    const std::size_t b = (e + 1) % n;
    const Vec2 dir = (q[b] - q[e]).normalized();
    if (nrm[e].dot(dir) < kGrazingTolerance || nrm[b].dot(-dir) < kGrazingTolerance)
      throw solver_error(fmt::format(
          "orbit not realizable: chord {} -> {} is grazing or crosses an "
          "obstacle (cos = {:.3e}, {:.3e})",
          e, b, nrm[e].dot(dir), nrm[b].dot(-dir)));
  }

  std::vector<ReflectionRecord> out;
  out.reserve(count);
  double t = 0.0;
  for (std::size_t c = begin; c < begin + count; ++c) {
    ReflectionRecord rec;
    rec.obstacle = symbols[c];
    rec.u = u[c];
    rec.point = q[c];
    rec.kappa = kap[c];
    rec.t = t;
    const std::size_t nx = next_index(c, n, cyclic);
    if (nx < n) {
      const Vec2 chord = q[nx] - q[c];
      rec.d = chord.norm();
      rec.direction = chord / *rec.d;
      t += *rec.d;
    } else {
      const Vec2 incoming = (q[c] - q[c - 1]).normalized();
      rec.direction = reflect(incoming, nrm[c]);
    }
    rec.phi = std::acos(std::clamp(nrm[c].dot(rec.direction), -1.0, 1.0));
    out.push_back(rec);
  }
  return out;
}

void check_word(const Word& word, const DeformationFamily& family) {
  if (!is_admissible(word, family.size()))
    throw config_error(fmt::format("word {} is not admissible{}",
                                   format_word(word),
                                   word.cyclic ? " (cyclic)" : ""));
}

}  // namespace

double chain_length(const DeformationFamily& family, double alpha,
                    std::span<const std::size_t> symbols,
                    std::span<const double> u, bool cyclic,
                    Eigen::VectorXd* gradient, Eigen::MatrixXd* hessian) {
  const std::size_t n = symbols.size();
  const int order = hessian ? 2 : 1;
  std::vector<BoundaryJet> jets;
  jets.reserve(n);
  for (std::size_t j = 0; j < n; ++j)
    jets.push_back(family.eval_jet(symbols[j], u[j], alpha, order, 0));
  const auto sz = static_cast<Eigen::Index>(n);
  if (gradient) gradient->setZero(sz);
  if (hessian) hessian->setZero(sz, sz);

  double total = 0.0;
  const std::size_t edges = cyclic ? n : n - 1;
  for (std::size_t e = 0; e < edges; ++e) {
    const std::size_t a = e, b = (e + 1) % n;
    const Vec2 D = jets[b](0, 0) - jets[a](0, 0);
    const double len = D.norm();
    total += len;
    const Vec2 eh = D / len;
    const Vec2 da = -jets[a](1, 0), db = jets[b](1, 0);
    const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
    if (gradient) {
      (*gradient)(ia) += eh.dot(da);
      (*gradient)(ib) += eh.dot(db);
    }
    if (hessian) {
      // d2|D| = (dD^T (I - e e^T) dD) / |D| + <e, d2D>
      auto proj = [&](const Vec2& x, const Vec2& y) {
        return (x.dot(y) - eh.dot(x) * eh.dot(y)) / len;
      };
      (*hessian)(ia, ia) += proj(da, da) - eh.dot(jets[a](2, 0));
      (*hessian)(ib, ib) += proj(db, db) + eh.dot(jets[b](2, 0));
      (*hessian)(ia, ib) += proj(da, db);
      (*hessian)(ib, ia) += proj(da, db);
    }
  }
  return total;
}

BilliardOrbit find_periodic_orbit(const Word& word,
                                  const DeformationFamily& family, double alpha,
                                  const OrbitOptions& options,
                                  std::span<const double> init) {
  if (!word.cyclic) throw config_error("find_periodic_orbit needs a cyclic word");
  check_word(word, family);
  family.check_alpha(alpha);
  std::vector<double> u0 = init.size() == word.size()
                               ? std::vector<double>(init.begin(), init.end())
                               : seed_chain(family, alpha, word.symbols, true);
  SolveResult sol =
      minimize_chain(family, alpha, word.symbols, true, std::move(u0), options);
  if (!(sol.residual <= options.tol_orbit))
    throw solver_error(fmt::format(
        "periodic orbit {} did not converge at alpha = {}: residual {:.3e} "
        "after {} iterations",
        format_word(word), alpha, sol.residual, sol.iterations));

  BilliardOrbit orbit;
  orbit.word = word;
  orbit.alpha = alpha;
  orbit.kind = OrbitKind::periodic;
  orbit.records = chain_records(family, alpha, word.symbols, sol.u, true, 0,
                                word.size());
  orbit.residual = sol.residual;
  orbit.iterations = sol.iterations;
  orbit.chain = {word.symbols, sol.u, true, 0, word.size()};
  return orbit;
}

namespace {

OrbitChain padded_chain(const Word& word, int padding) {
  OrbitChain ch;
  std::vector<std::size_t> left;
  std::size_t prev = word.symbols.front();
  for (int p = 0; p < padding; ++p) {
    prev = smallest_successor(prev);
    left.push_back(prev);
  }
  ch.symbols.assign(left.rbegin(), left.rend());
  ch.symbols.insert(ch.symbols.end(), word.symbols.begin(), word.symbols.end());
  prev = word.symbols.back();
  for (int p = 0; p < padding; ++p) {
    prev = smallest_successor(prev);
    ch.symbols.push_back(prev);
  }
  ch.cyclic = false;
  ch.core_begin = static_cast<std::size_t>(padding);
  ch.core_size = word.size();
  return ch;
}

BilliardOrbit solve_segment(const Word& word, const DeformationFamily& family,
                            double alpha, int padding,
                            const OrbitOptions& options,
                            std::span<const double> init) {
  OrbitChain ch = padded_chain(word, padding);
  if (ch.symbols.size() < 2)
    throw config_error("an orbit segment needs at least 2 vertices");
  std::vector<double> u0 = init.size() == ch.symbols.size()
                               ? std::vector<double>(init.begin(), init.end())
                               : seed_chain(family, alpha, ch.symbols, false);
  SolveResult sol =
      minimize_chain(family, alpha, ch.symbols, false, std::move(u0), options);
  if (!(sol.residual <= options.tol_orbit))
    throw solver_error(fmt::format(
        "orbit segment {} did not converge at alpha = {}: residual {:.3e} "
        "after {} iterations",
        format_word(word), alpha, sol.residual, sol.iterations));
  BilliardOrbit orbit;
  orbit.word = word;
  orbit.alpha = alpha;
  orbit.kind = OrbitKind::segment;
  orbit.records = chain_records(family, alpha, ch.symbols, sol.u, false,
                                ch.core_begin, ch.core_size);
  orbit.residual = sol.residual;
  orbit.iterations = sol.iterations;
  ch.u = std::move(sol.u);
  orbit.chain = std::move(ch);
  return orbit;
}

}  // namespace

BilliardOrbit find_orbit_segment(const Word& word,
                                 const DeformationFamily& family, double alpha,
                                 int padding, const OrbitOptions& options,
                                 std::span<const double> init) {
  if (padding < 0) throw config_error("padding must be >= 0");
  check_word(Word{word.symbols, false}, family);
  family.check_alpha(alpha);
  Word open{word.symbols, false};
  BilliardOrbit orbit = solve_segment(open, family, alpha, padding, options, init);

  if (options.check_shadowing && padding >= 8) {
    const std::size_t cut = 4;
    std::span<const double> inner(orbit.chain.u.data() + cut,
                                  orbit.chain.u.size() - 2 * cut);
    const BilliardOrbit coarse =
        solve_segment(open, family, alpha, padding - 4, options, inner);
    double moved = 0.0;
    for (std::size_t j = 0; j < orbit.records.size(); ++j)
      moved = std::max(moved,
                       (orbit.records[j].point - coarse.records[j].point).norm());
    if (moved > options.tol_shadow)
      throw solver_error(fmt::format(
          "shadowing did not stabilize for word {}: core moved {:.3e} between "
          "padding {} and {}; increase padding",
          format_word(word), moved, padding - 4, padding));
  }
  return orbit;
}

BilliardOrbit continue_orbit(const BilliardOrbit& orbit,
                             const DeformationFamily& family, double alpha,
                             const OrbitOptions& options) {
  if (orbit.kind == OrbitKind::periodic)
    return find_periodic_orbit(orbit.word, family, alpha, options, orbit.chain.u);
  const int padding = static_cast<int>(orbit.chain.core_begin);
  return find_orbit_segment(orbit.word, family, alpha, padding, options,
                            orbit.chain.u);
}

Word read_itinerary(const BilliardOrbit& orbit) {
  Word w;
  w.cyclic = orbit.kind == OrbitKind::periodic;
  for (const auto& r : orbit.records) w.symbols.push_back(r.obstacle);
  return w;
}

AlphaDerivatives orbit_alpha_derivatives(const BilliardOrbit& orbit,
                                         const DeformationFamily& family) {
  const OrbitChain& ch = orbit.chain;
  const double alpha = orbit.alpha;
  const std::size_t n = ch.symbols.size();
  const bool cyclic = ch.cyclic;

  std::vector<BoundaryJet> jets;
  jets.reserve(n);
  for (std::size_t j = 0; j < n; ++j)
    jets.push_back(family.eval_jet(ch.symbols[j], ch.u[j], alpha, 3, 1));

  MatrixXd H;
  VectorXd g;
  chain_length(family, alpha, ch.symbols, ch.u, cyclic, &g, &H);

  // d(grad L)/d alpha
  const auto sz = static_cast<Eigen::Index>(n);
  VectorXd rhs = VectorXd::Zero(sz);
  const std::size_t edges = cyclic ? n : n - 1;
  for (std::size_t e = 0; e < edges; ++e) {
    const std::size_t a = e, b = (e + 1) % n;
    const Vec2 D = jets[b](0, 0) - jets[a](0, 0);
    const double len = D.norm();
    const Vec2 eh = D / len;
    const Vec2 da = -jets[a](1, 0), db = jets[b](1, 0);
    const Vec2 dalpha = jets[b](0, 1) - jets[a](0, 1);
    auto proj = [&](const Vec2& x, const Vec2& y) {
      return (x.dot(y) - eh.dot(x) * eh.dot(y)) / len;
    };
    rhs(static_cast<Eigen::Index>(a)) += proj(da, dalpha) - eh.dot(jets[a](1, 1));
    rhs(static_cast<Eigen::Index>(b)) += proj(db, dalpha) + eh.dot(jets[b](1, 1));
  }

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(H, Eigen::EigenvaluesOnly);
  const auto ev = eig.eigenvalues().cwiseAbs();
  const double cond = ev.minCoeff() > 0.0
                          ? ev.maxCoeff() / ev.minCoeff()
                          : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e12))
    throw solver_error(fmt::format(
        "length Hessian ill-conditioned for word {} (condition number {:.3e})",
        format_word(orbit.word), cond));
  const VectorXd udot_all = H.ldlt().solve(-rhs);

  std::vector<Vec2> qdot(n), tdot(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double ud = udot_all(static_cast<Eigen::Index>(j));
    qdot[j] = jets[j](1, 0) * ud + jets[j](0, 1);
    tdot[j] = jets[j](2, 0) * ud + jets[j](1, 1);
  }

  AlphaDerivatives out;
  out.condition_number = cond;
  const std::size_t m = orbit.records.size();
  out.u_dot.resize(m);
  out.d_dot.resize(m);
  out.kappa_dot.resize(m);
  out.cosphi_dot.resize(m);
  out.g_dot.resize(m);

  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t c = ch.core_begin + r;
    const BoundaryJet& J = jets[c];
    const double ud = udot_all(static_cast<Eigen::Index>(c));
    out.u_dot[r] = ud;

    // curvature kappa = N / s^3 along (u(alpha), alpha)
    const Vec2 d1 = J(1, 0), d2 = J(2, 0), d3 = J(3, 0);
    const Vec2 d1a = J(1, 1), d2a = J(2, 1);
    const double N = cross(d1, d2);
    const double s2 = d1.squaredNorm();
    const double N_u = cross(d1, d3);
    const double N_a = cross(d1a, d2) + cross(d1, d2a);
    const double s2_u = 2.0 * d1.dot(d2);
    const double s2_a = 2.0 * d1.dot(d1a);
    const double s3 = std::pow(s2, 1.5), s5 = std::pow(s2, 2.5);
    const double kappa = N / s3;
    const double kappa_u = N_u / s3 - 1.5 * N * s2_u / s5;
    const double kappa_a = N_a / s3 - 1.5 * N * s2_a / s5;
    out.kappa_dot[r] = kappa_u * ud + kappa_a;

    // outward normal n = rot(t)/|t| and its derivative
    const double tl = d1.norm();
    const Vec2 that = d1 / tl;
    const Vec2 nrm{that.y(), -that.x()};
    const Vec2 tperp = (tdot[c] - that * that.dot(tdot[c])) / tl;
    const Vec2 ndot{tperp.y(), -tperp.x()};

    const std::size_t nx = next_index(c, n, cyclic);
    Vec2 e, edot;
    if (nx < n) {
      const Vec2 D = jets[nx](0, 0) - J(0, 0);
      const double len = D.norm();
      e = D / len;
      const Vec2 Ddot = qdot[nx] - qdot[c];
      edot = (Ddot - e * e.dot(Ddot)) / len;
      out.d_dot[r] = e.dot(Ddot);
    } else {
      // free end: use the incoming chord reversed
      const Vec2 D = J(0, 0) - jets[c - 1](0, 0);
      const double len = D.norm();
      const Vec2 ein = D / len;
      const Vec2 Ddot = qdot[c] - qdot[c - 1];
      e = -ein;
      edot = -(Ddot - ein * ein.dot(Ddot)) / len;
      out.d_dot[r] = std::numeric_limits<double>::quiet_NaN();
    }
    const double cosphi = nrm.dot(e);
    const double cosphi_dot = ndot.dot(e) + nrm.dot(edot);
    out.cosphi_dot[r] = cosphi_dot;
    out.g_dot[r] = 2.0 * out.kappa_dot[r] / cosphi -
                   2.0 * kappa * cosphi_dot / (cosphi * cosphi);
  }
  return out;
}

}  // namespace billiards
