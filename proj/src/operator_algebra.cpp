#include "specont/operator_algebra.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace specont {

const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_operand: return "InvalidOperand";
    case errc::eig_failure: return "EigFailure";
    case errc::not_positive_semidefinite: return "NotPositiveSemidefinite";
    case errc::outside_holomorphy_domain: return "OutsideHolomorphyDomain";
    case errc::endpoint_singularity: return "EndpointSingularity";
    case errc::contour_outside_domain: return "ContourOutsideDomain";
    case errc::contour_degenerate: return "ContourDegenerate";
    case errc::unbounded_tail: return "UnboundedTail";
    case errc::divergent_variation: return "DivergentVariation";
    case errc::contour_touches_spectrum: return "ContourTouchesSpectrum";
    case errc::no_admissible_contour: return "NoAdmissibleContour";
    case errc::on_spectral_cut: return "OnSpectralCut";
    case errc::near_contour: return "NearContour";
    case errc::spectrum_meets_contour: return "SpectrumMeetsContour";
    case errc::no_convergence: return "NoConvergence";
    case errc::not_admissible: return "NotAdmissible";
    case errc::bad_residue_contour: return "BadResidueContour";
    case errc::omega_singular: return "OmegaSingular";
    case errc::circle_not_isolating: return "CircleNotIsolating";
    case errc::unresolved_region: return "UnresolvedRegion";
    case errc::ill_conditioned_sample: return "IllConditionedSample";
    case errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

bool all_finite(const CMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
        return false;
  return true;
}

bool is_hermitian(const CMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double spectral_norm(const CMatrix& m) {
  if (!all_finite(m)) raise(errc::invalid_operand, "non-finite matrix entries");
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  if (std::max(m.rows(), m.cols()) <= 16) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
  }
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

std::vector<EigPair> eig_general(const CMatrix& m) {
  if (!all_finite(m)) raise(errc::invalid_operand, "non-finite matrix entries");
  if (m.rows() != m.cols()) raise(errc::invalid_operand, "matrix not square");
  const Index n = m.rows();
  std::vector<EigPair> out;
  if (n == 0) return out;

  Eigen::ComplexEigenSolver<CMatrix> es(m, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success)
    raise(errc::eig_failure, "dense eigensolver did not converge");

  out.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    EigPair p;
    p.value = es.eigenvalues()(k);
    p.vector = es.eigenvectors().col(k);
    const double vn = p.vector.norm();
    if (vn > 0) p.vector /= vn;
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), [](const EigPair& a, const EigPair& b) {
    if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
    return a.value.imag() < b.value.imag();
  });
  return out;
}

CMatrix psd_factor(const CMatrix& m, double tol_psd) {
  if (!all_finite(m)) raise(errc::invalid_operand, "non-finite matrix entries");
  if (m.rows() != m.cols()) raise(errc::invalid_operand, "matrix not square");
  const Index n = m.rows();

  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  if (es.info() != Eigen::Success)
    raise(errc::eig_failure, "hermitian eigensolver did not converge");

  const RVector& ev = es.eigenvalues();
  if (n > 0 && ev(0) < -tol_psd)
    raise(errc::not_positive_semidefinite,
          "eigenvalue " + std::to_string(ev(0)) + " below -tol_psd");

  Index rank = 0;
  for (Index k = 0; k < n; ++k)
    if (ev(k) > tol_psd) ++rank;

  CMatrix g(rank, n);
  Index row = 0;
  for (Index k = 0; k < n; ++k) {
    if (ev(k) <= tol_psd) continue;
    g.row(row++) = std::sqrt(ev(k)) * es.eigenvectors().col(k).adjoint();
  }
  return g;
}

ResolventFactors resolvent_factors(const CMatrix& m) {
  if (m.rows() != m.cols()) raise(errc::invalid_operand, "matrix not square");
  ResolventFactors f;
  if (m.rows() == 0) return f;
  Eigen::ComplexEigenSolver<CMatrix> es(m, true);
  if (es.info() != Eigen::Success)
    raise(errc::eig_failure, "dense eigensolver did not converge");
  f.lambda = es.eigenvalues();
  f.s = es.eigenvectors();
  f.s_inv = f.s.partialPivLu().inverse();
  return f;
}

}  // namespace specont
