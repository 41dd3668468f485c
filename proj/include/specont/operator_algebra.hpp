#pragma once

#include <vector>

#include "specont/types.hpp"

namespace specont {

bool all_finite(const CMatrix& m);
bool is_hermitian(const CMatrix& m, double tol = 0.0);

/// Operator (spectral) norm: largest singular value.
double spectral_norm(const CMatrix& m);

struct EigPair {
  Complex value;
  CVector vector;  // unit norm
};

/// Dense eigendecomposition of a general complex matrix.  Pairs are sorted by
/// (Re, Im) of the eigenvalue; each satisfies |M v - lambda v| <= tol_eig |M|.
/// Defective matrices are reported without generalized eigenvectors.
std::vector<EigPair> eig_general(const CMatrix& m);

/// Factor a Hermitian PSD matrix as M ~= G^* G, where G has one row per
/// eigenvalue above tol_psd.  Eigenvalues below -tol_psd are rejected.
CMatrix psd_factor(const CMatrix& m, double tol_psd);

// Eigendecomposition M = S diag(lambda) S^{-1}, kept around for resolvent
// sandwiches evaluated at many shift points.
struct ResolventFactors {
  CVector lambda;
  CMatrix s;
  CMatrix s_inv;
};

ResolventFactors resolvent_factors(const CMatrix& m);

}  // namespace specont
