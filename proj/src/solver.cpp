#include "specont/solver.hpp"

#include <algorithm>
#include <cmath>

#include "specont/active.hpp"
#include "specont/operator_algebra.hpp"

namespace specont {

namespace {

// One Picard step on the active block: V1(tilde_a1 + X, Gamma) restricted to
// the support of the density.
CMatrix v1_active(const SpectralDensity& model, const Contour& contour,
                  const ActiveSpace& as, const CMatrix& y_act) {
  const Index m = y_act.rows();
  if (m == 0) return CMatrix::Zero(0, 0);
  ResolventFactors f = resolvent_factors(y_act);
  const double scale = 1.0 + y_act.cwiseAbs().maxCoeff();
  for (const Complex& mu : contour.nodes)
    for (Index i = 0; i < m; ++i)
      if (std::abs(f.lambda(i) - mu) < 1e-11 * scale)
        raise(errc::spectrum_meets_contour,
              "iterate spectrum meets the contour");

  std::vector<DensityTerm> ts;
  std::vector<CVector> lcols;
  std::vector<Eigen::RowVectorXcd> rrows;
  for (std::size_t j = 0; j < contour.size(); ++j) {
    const Complex mu = contour.nodes[j];
    const Complex w = contour.weights[j];
    ts.clear();
    model.terms(mu, ts);
    for (const auto& t : ts) {
      CVector left = as.reduced() ? as.restrict_to_active(t.left) : t.left;
      CVector right = as.reduced() ? as.restrict_to_active(t.right) : t.right;
      Eigen::RowVectorXcd row = right.transpose() * f.s;
      for (Index i = 0; i < m; ++i) row(i) *= f.lambda(i) / (f.lambda(i) - mu);
      lcols.push_back((w * t.coef) * left);
      rrows.push_back(std::move(row));
    }
  }
  const Index tcount = static_cast<Index>(lcols.size());
  if (tcount == 0) return CMatrix::Zero(m, m);
  CMatrix l(m, tcount), r(tcount, m);
  for (Index k = 0; k < tcount; ++k) {
    l.col(k) = lcols[k];
    r.row(k) = rrows[k];
  }
  return l * (r * f.s_inv);
}

}  // namespace

SolveReport solve_basic_equation(const SpectralDensity& model,
                                 const Contour& contour,
                                 const SolveOptions& opts) {
  SolveReport rep;
  rep.sheet = contour.sheet;
  rep.admissibility = admissibility(model, contour);
  rep.certified = rep.admissibility.certified();
  if (!rep.certified && !opts.allow_noncertified)
    raise(errc::not_admissible,
          "admissibility conditions fail; pass allow_noncertified to proceed");

  ActiveSpace as = ActiveSpace::make(model);
  const CMatrix a_act = as.reduced() ? as.restrict_to_active(model.tilde_a1())
                                     : model.tilde_a1();
  const Index m = a_act.rows();

  CMatrix x = CMatrix::Zero(m, m);
  bool converged = false;
  for (int k = 0; k < opts.max_iter; ++k) {
    CMatrix xn = v1_active(model, contour, as, a_act + x);
    const double r = spectral_norm(xn - x);
    rep.residual_history.push_back(r);
    x = std::move(xn);
    rep.max_iterate_norm = std::max(rep.max_iterate_norm, spectral_norm(x));
    rep.iterations = k + 1;
    if (r <= opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    raise(errc::no_convergence, "Picard iteration exceeded max_iter");

  rep.final_residual = rep.residual_history.back();
  rep.contraction_estimate = 0.0;
  for (std::size_t i = 2; i < rep.residual_history.size(); ++i) {
    const double prev = rep.residual_history[i - 1];
    if (prev > 0.0)
      rep.contraction_estimate =
          std::max(rep.contraction_estimate, rep.residual_history[i] / prev);
  }

  // re-verify the fixed point on a doubled quadrature
  {
    QuadSpec fine_spec = contour.quad.refined();
    fine_spec.lambda_tail_override = contour.lambda_tail;
    Contour fine = build_contour(model, contour.sheet, contour.shape, fine_spec);
    CMatrix v_fine = v1_active(model, fine, as, a_act + x);
    rep.certificate_residual = spectral_norm(v_fine - x);
  }

  rep.norm_x = spectral_norm(x);
  rep.x = as.reduced() ? as.embed_zero(x) : x;
  rep.h1 = model.tilde_a1() + rep.x;
  return rep;
}

double verify_contour_independence(const SpectralDensity& model,
                                   const Contour& contour_a,
                                   const Contour& contour_b,
                                   const SolveOptions& opts) {
  if (contour_a.sheet != contour_b.sheet)
    raise(errc::invalid_operand, "contours must lie on the same sheet");
  SolveReport ra = solve_basic_equation(model, contour_a, opts);
  SolveReport rb = solve_basic_equation(model, contour_b, opts);
  return spectral_norm(ra.x - rb.x);
}

std::vector<SpectralPoint> spectrum_H1(const SolveReport& report) {
  const CMatrix& h1 = report.h1;
  const Index n = h1.rows();

  // split off indices coupled only through their diagonal entry
  std::vector<Index> dense_idx, diag_idx;
  for (Index i = 0; i < n; ++i) {
    bool coupled = false;
    for (Index k = 0; k < n && !coupled; ++k)
      if (k != i && (h1(i, k) != Complex(0, 0) || h1(k, i) != Complex(0, 0)))
        coupled = true;
    (coupled ? dense_idx : diag_idx).push_back(i);
  }

  std::vector<SpectralPoint> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i : diag_idx) {
    SpectralPoint p;
    p.lambda = h1(i, i);
    p.vec = CVector::Zero(n);
    p.vec(i) = 1.0;
    p.eig_residual = 0.0;
    out.push_back(std::move(p));
  }
  if (!dense_idx.empty()) {
    const Index m = static_cast<Index>(dense_idx.size());
    CMatrix block(m, m);
    for (Index i = 0; i < m; ++i)
      for (Index k = 0; k < m; ++k) block(i, k) = h1(dense_idx[i], dense_idx[k]);
    const double hnorm = spectral_norm(block);
    for (const EigPair& p : eig_general(block)) {
      SpectralPoint sp;
      sp.lambda = p.value;
      sp.vec = CVector::Zero(n);
      for (Index i = 0; i < m; ++i) sp.vec(dense_idx[i]) = p.vector(i);
      sp.eig_residual = (block * p.vector - p.value * p.vector).norm();
      if (sp.eig_residual > 100.0 * kTolEig * std::max(hnorm, 1.0))
        raise(errc::eig_failure, "eigenpair residual above tolerance");
      out.push_back(std::move(sp));
    }
  }
  std::sort(out.begin(), out.end(), [](const SpectralPoint& a, const SpectralPoint& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() < b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });
  return out;
}

}  // namespace specont
