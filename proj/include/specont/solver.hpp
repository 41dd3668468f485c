#pragma once

#include <vector>

#include "specont/contour.hpp"
#include "specont/model.hpp"
#include "specont/transfer.hpp"
#include "specont/types.hpp"

namespace specont {

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 200;
  bool allow_noncertified = false;
};

struct SolveReport {
  CMatrix x;
  CMatrix h1;  // tilde_a1 + x
  int sheet = +1;
  int iterations = 0;
  std::vector<double> residual_history;  // |X_{k+1} - X_k|
  double final_residual = 0.0;
  double contraction_estimate = 0.0;  // max ratio of consecutive residuals
  AdmissibilityReport admissibility;
  double norm_x = 0.0;
  double max_iterate_norm = 0.0;
  bool certified = false;
  // |V1(tilde_a1 + X, Gamma) - X| re-verified with doubled quadrature
  double certificate_residual = 0.0;
};

/// Picard iteration X_{k+1} = V1(tilde_a1 + X_k, Gamma) from X_0 = 0.  Under
/// the admissibility conditions the map contracts and the solution lies in
/// the ball of radius r_min.  Without them the solve refuses to run unless
/// allow_noncertified is set, and the report is flagged non-certified.
SolveReport solve_basic_equation(const SpectralDensity& model,
                                 const Contour& contour,
                                 const SolveOptions& opts = {});

/// |X_A - X_B| for two admissible contours on the same sheet (the solution
/// is contour-independent up to quadrature).
double verify_contour_independence(const SpectralDensity& model,
                                   const Contour& contour_a,
                                   const Contour& contour_b,
                                   const SolveOptions& opts = {});

struct SpectralPoint {
  Complex lambda;
  CVector vec;
  double eig_residual = 0.0;  // |H1 v - lambda v|
};

/// Eigenpairs of H1, sorted by (Re, Im).  Nonreal eigenvalues lie on the
/// sheet-l side of the axis.
std::vector<SpectralPoint> spectrum_H1(const SolveReport& report);

}  // namespace specont
