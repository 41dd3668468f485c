#pragma once

// Shared model instances for the unit and acceptance suites.

#include <memory>

#include "specont/contour.hpp"
#include "specont/model.hpp"
#include "specont/rng.hpp"

namespace specont::testing {

inline HolDomain default_strip(double alpha0) {
  HolDomain d;
  d.kind = HolDomain::Kind::strip;
  d.alpha0 = alpha0;
  d.height = 2.0;
  d.margin = 0.5;
  return d;
}

// alpha0 = 1, tilde_a1 = 2, phi = eps^2 e^{-(mu-1)}, the one-dimensional
// reference instance
inline std::unique_ptr<SeparableModel> scalar_model(double eps = 0.05) {
  CMatrix a1(1, 1);
  a1(0, 0) = 2.0;
  ScalarProfile phi;
  phi.kind = ScalarProfile::Kind::exp_decay;
  phi.amplitude = eps * eps;
  phi.rate = 1.0;
  phi.center = 1.0;
  CMatrix g = CMatrix::Identity(1, 1);
  return std::make_unique<SeparableModel>(1.0, a1, phi, g, default_strip(1.0));
}

inline std::unique_ptr<SeparableModel> zero_model(Index n = 2) {
  CMatrix a1 = CMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) a1(i, i) = 2.0 + 0.2 * static_cast<double>(i);
  ScalarProfile phi;  // zero
  return std::make_unique<SeparableModel>(1.0, a1, phi, CMatrix::Identity(n, n),
                                          default_strip(1.0));
}

inline ContourShape default_shape() { return ContourShape{0.3, 3.2}; }

// Random Hermitian tilde_a1 with spectrum in [lo, hi] plus a random coupling,
// with the amplitude calibrated to a target Var_{tilde_a1}(B, Gamma).
inline std::unique_ptr<SeparableModel> random_separable(
    std::uint64_t seed, Index n, double target_var,
    const ContourShape& shape = default_shape(), int rank = 2,
    double lo = 2.0, double hi = 2.35) {
  Rng rng(seed);
  CMatrix q(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k) q(i, k) = rng.cnormal();
  Eigen::HouseholderQR<CMatrix> qr(q);
  CMatrix unitary = qr.householderQ();
  CMatrix a1 = CMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    a1(i, i) = rng.uniform(lo, hi);
  a1 = unitary * a1 * unitary.adjoint();
  a1 = 0.5 * (a1 + a1.adjoint()).eval();

  CMatrix g(rank, n);
  for (Index i = 0; i < rank; ++i)
    for (Index k = 0; k < n; ++k) g(i, k) = Complex(rng.normal(), rng.normal());

  ScalarProfile phi;
  phi.kind = ScalarProfile::Kind::exp_decay;
  phi.amplitude = 1.0;
  phi.rate = rng.uniform(0.6, 1.4);
  phi.center = 1.0;

  auto probe = std::make_unique<SeparableModel>(1.0, a1, phi, g,
                                                default_strip(1.0));
  Contour c = build_contour(*probe, +1, shape, QuadSpec{});
  AdmissibilityReport rep = admissibility(*probe, c);
  phi.amplitude = target_var / rep.var_tilde;
  return std::make_unique<SeparableModel>(1.0, std::move(a1), phi,
                                          std::move(g), default_strip(1.0));
}

// The grid example at acceptance scale: lambda0 = 1, [-10, 10] with 256
// points, truncated-gaussian coupling (cutoff between grid points), constant
// a1 = 2.
inline std::unique_ptr<SchroedingerModel> schroedinger_example(
    double amplitude = 0.05, int n_points = 256, double half_width = 10.0) {
  ScalarProfile b;
  b.kind = ScalarProfile::Kind::gaussian;
  b.amplitude = amplitude;
  b.center = 0.3;
  b.sigma = 1.0;
  b.cutoff = 2.03;
  ScalarProfile a1;
  a1.kind = ScalarProfile::Kind::constant;
  a1.amplitude = 2.0;
  return std::make_unique<SchroedingerModel>(1.0, half_width, n_points, b, a1,
                                             /*decay_alpha=*/1.0,
                                             /*decay_c=*/2.0 * amplitude *
                                                 std::exp(2.33));
}

// Small full-support variant exercising the dense (non-reduced) paths.
inline std::unique_ptr<SchroedingerModel> schroedinger_small(
    double amplitude = 0.05, int n_points = 48, double half_width = 6.0) {
  ScalarProfile b;
  b.kind = ScalarProfile::Kind::gaussian;
  b.amplitude = amplitude;
  b.center = 0.0;
  b.sigma = 1.0;
  ScalarProfile a1;
  a1.kind = ScalarProfile::Kind::constant;
  a1.amplitude = 2.0;
  return std::make_unique<SchroedingerModel>(1.0, half_width, n_points, b, a1,
                                             1.0, 2.0 * amplitude);
}

inline QuadSpec schro_quad() {
  QuadSpec q;
  q.lambda_tail_override = 2.5e3;
  return q;
}

inline ContourShape schro_shape() { return ContourShape{0.35, 3.0}; }

}  // namespace specont::testing
