#pragma once

#include <span>
#include <vector>

#include "specont/contour.hpp"
#include "specont/model.hpp"
#include "specont/solver.hpp"
#include "specont/types.hpp"

namespace specont {

struct CircleSpec {
  Complex center;
  double radius = 0.0;
  int points = 64;
};

/// W1(z, Gamma) = I - int K'(mu)(H1-mu)^{-1} dmu
///                  + z int K'(mu)(z-mu)^{-1}(H1-mu)^{-1} dmu,
/// the left factor in M1(z, Gamma) = W1(z, Gamma) (H1 - z).
CMatrix eval_W1(const SpectralDensity& model, const Contour& contour,
                const CMatrix& h1, Complex z);

/// Norm bound for |W1(z,Gamma)^{-1}| valid when dist(z, spec tilde_a1) is at
/// most the equality radius.
double w1_inverse_bound(const AdmissibilityReport& adm);

/// max_z |M1(z,Gamma) - W1(z,Gamma)(H1 - z)| / (1 + |M1(z,Gamma)|).
double factorization_residual(const SpectralDensity& model,
                              const Contour& contour, const SolveReport& report,
                              std::span<const Complex> z_samples);

/// Omega = int mu (H1^{(-l)*} - mu)^{-1} K'(mu) (H1^{(l)} - mu)^{-1} dmu over
/// Gamma_l.  Contour-independent among admissible contours; |Omega| < 1 on
/// certified instances.
CMatrix compute_Omega(const SpectralDensity& model, const Contour& contour_l,
                      const CMatrix& h1_l, const CMatrix& h1_minus_l);

struct IdentityResiduals {
  double factorization = 0.0;
  double m_omega = 0.0;     // -(2 pi i)^{-1} oint M1^{-1} = (I+Omega)^{-1}
  double h_omega = 0.0;     // first-moment identity, both orderings
  double residue_pp = 0.0;  // eigenprojection relations at tested eigenvalues
  double adjoint = 0.0;
  double similarity = 0.0;  // H1^{(l)*} ~ H1^{(-l)} via I + Omega^{(-l)}
  double omega_conj = 0.0;  // |Omega^{(-l)} - Omega^{(l)*}|
  double omega_norm = 0.0;
};

/// The contour-integral reconstruction identities checked on equispaced
/// circle quadrature.  gamma must enclose all of spec(H1^(l)), stay inside
/// the spectral-equality set and miss the contour.
IdentityResiduals omega_identities(const SpectralDensity& model,
                                   const Contour& contour_l,
                                   const Contour& contour_minus_l,
                                   const SolveReport& rep_l,
                                   const SolveReport& rep_minus_l,
                                   const CircleSpec& gamma);

struct EigenResidueRecord {
  Complex lambda;
  CMatrix proj_h1;       // residue of (H1^{(l)} - z)^{-1}
  CMatrix proj_h1_star;  // residue of (H1^{(-l)*} - z)^{-1}
  CMatrix proj_m1;       // residue of M1(z, Gamma_l)^{-1}
  double relation_a = 0.0;  // proj_m1 vs proj_h1 (I+Omega)^{-1}
  double relation_b = 0.0;  // proj_m1 vs (I+Omega)^{-1} proj_h1_star
  double idempotency = 0.0;
  double commutation = 0.0;
  double trace_deviation = 0.0;
};

/// Residue integrals on a small circle isolating one eigenvalue of H1^{(l)}.
EigenResidueRecord eigenprojection_residues(const SpectralDensity& model,
                                            const Contour& contour_l,
                                            const Contour& contour_minus_l,
                                            const SolveReport& rep_l,
                                            const SolveReport& rep_minus_l,
                                            Complex lambda,
                                            const CircleSpec& small_circle);

/// max_z |W1(z,Gamma_l)(H1^{(l)}-z) - (H1^{(-l)*}-z)[W1(conj z,Gamma_{-l})]^*|.
double adjoint_relation_residual(const SpectralDensity& model,
                                 const Contour& contour_l,
                                 const Contour& contour_minus_l,
                                 const SolveReport& rep_l,
                                 const SolveReport& rep_minus_l,
                                 std::span<const Complex> z_samples);

// Trapezoid circle integral  -(2 pi i)^{-1} oint z^moment f(z) dz  for a
// matrix-valued f; spectrally accurate for integrands analytic near the
// circle.
CMatrix circle_residue_integral(const CircleSpec& circle, int moment,
                                const std::function<CMatrix(Complex)>& f);

/// Default residue circle: centered on the spectrum of tilde_a1, radius
/// chosen inside the spectral-equality set.  Throws bad_residue_contour if no
/// valid circle exists.
CircleSpec default_gamma_circle(const AdmissibilityReport& adm,
                                const std::vector<double>& tilde_a1_eigs,
                                std::span<const Complex> h1_spectrum,
                                int points);

}  // namespace specont
