#pragma once

#include <span>

#include "specont/contour.hpp"
#include "specont/model.hpp"
#include "specont/types.hpp"

namespace specont {

struct TransferEvaluation {
  Complex z;
  CMatrix value;
  int sheet = 0;  // 0 = physical, ±1 = continued through the cut
  double quadrature_residual = 0.0;
};

/// M1(z) = tilde_a1 - z + int_{Delta_0} K'(mu) z/(z-mu) dmu on the physical
/// sheet, by real-axis quadrature with a certified tail.  z must stay off the
/// cut [alpha0, inf).
TransferEvaluation eval_M1_physical(const SpectralDensity& model, Complex z);

/// Same, on a caller-supplied real mesh (used when the comparison against a
/// contour evaluation must share the truncated tail).
TransferEvaluation eval_M1_physical_on(const SpectralDensity& model,
                                       const RealMesh& mesh, Complex z);

/// Physical-sheet evaluation whose real tail reuses the contour's tail nodes
/// bitwise, so that continued-vs-physical comparisons isolate the deformed
/// segment and the common truncation cancels.
TransferEvaluation eval_M1_physical_paired(const SpectralDensity& model,
                                           const Contour& contour, Complex z);

/// Analytic continuation M1(z, Gamma_l) = tilde_a1 - z + sum_j w_j K'(mu_j)
/// z/(z - mu_j) + tail.  Coincides with the physical values outside the
/// closure of the deformed region; inside it differs by the residue jump.
TransferEvaluation eval_M1_continued(const SpectralDensity& model,
                                     const Contour& contour, Complex z);

/// V1(Y, Gamma) = sum_j w_j K'(mu_j) Y (Y - mu_j)^{-1} for a matrix argument
/// whose spectrum is separated from the contour.
CMatrix eval_V1_operator(const SpectralDensity& model, const Contour& contour,
                         const CMatrix& y);

/// The a-priori norm estimate Var_1(B,Gamma) |Y| sup_j (1+|mu_j|)
/// |(Y-mu_j)^{-1}| that bounds |V1(Y, Gamma)|.
double v1_norm_bound(const SpectralDensity& model, const Contour& contour,
                     const CMatrix& y);

// Shared low-level sum  sum_j w_j c(mu_j) K'(mu_j)  with a scalar coefficient
// function of the node.
CMatrix contour_scalar_sum(const SpectralDensity& model,
                           std::span<const Complex> nodes,
                           std::span<const Complex> weights,
                           const std::function<Complex(Complex)>& coef);

}  // namespace specont
