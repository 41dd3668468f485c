#include "specont/transfer.hpp"

#include <cmath>
#include <functional>

#include <Eigen/SVD>

#include "specont/operator_algebra.hpp"

namespace specont {

namespace {

double dist_to_cut(const SpectralDensity& model, Complex z) {
  if (z.real() >= model.alpha0()) return std::abs(z.imag());
  return std::abs(z - Complex(model.alpha0(), 0.0));
}

}  // namespace

CMatrix contour_scalar_sum(const SpectralDensity& model,
                           std::span<const Complex> nodes,
                           std::span<const Complex> weights,
                           const std::function<Complex(Complex)>& coef) {
  std::vector<Complex> coefs(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j)
    coefs[j] = weights[j] * coef(nodes[j]);
  return model.weighted_sum(nodes, coefs);
}

TransferEvaluation eval_M1_physical_on(const SpectralDensity& model,
                                       const RealMesh& mesh, Complex z) {
  const double dist = dist_to_cut(model, z);
  if (dist <= 1e-12 * (1.0 + std::abs(z)))
    raise(errc::on_spectral_cut, "z lies on the spectral interval");

  const Index n = model.dim();
  std::vector<Complex> nodes(mesh.nodes.begin(), mesh.nodes.end());
  std::vector<Complex> coefs(mesh.size());
  for (std::size_t j = 0; j < mesh.size(); ++j)
    coefs[j] = mesh.weights[j] * z / (z - mesh.nodes[j]);

  TransferEvaluation ev;
  ev.z = z;
  ev.sheet = 0;
  ev.value = model.tilde_a1() - z * CMatrix::Identity(n, n) +
             model.weighted_sum(nodes, coefs);
  double tail_bound = 0.0;
  if (model.decay() && !mesh.nodes.empty())
    tail_bound = model.decay()->tail_weighted(1.0, mesh.nodes.back()) *
                 (1.0 + 2.0 * std::abs(z));
  ev.quadrature_residual = tail_bound;
  return ev;
}

TransferEvaluation eval_M1_physical(const SpectralDensity& model, Complex z) {
  const double dist = dist_to_cut(model, z);
  if (dist <= 1e-12 * (1.0 + std::abs(z)))
    raise(errc::on_spectral_cut, "z lies on the spectral interval");
  if (!model.decay())
    raise(errc::unbounded_tail, "model provides no decay profile for the tail");

  const double a0 = model.alpha0();
  const double norm_a1 = model.tilde_a1().rows() > 0
                             ? model.tilde_a1().cwiseAbs().rowwise().sum().maxCoeff()
                             : 0.0;
  const double pivot = a0 + std::max(2.0, 1.5 * (norm_a1 - a0) + 1.0);
  QuadSpec quad;
  RealMesh mesh = model_segment_mesh(model, pivot, quad, z.real(), dist);
  mesh.append(model_tail_mesh(model, pivot, quad, nullptr, nullptr));
  return eval_M1_physical_on(model, mesh, z);
}

TransferEvaluation eval_M1_physical_paired(const SpectralDensity& model,
                                           const Contour& contour, Complex z) {
  const double dist = dist_to_cut(model, z);
  if (dist <= 1e-12 * (1.0 + std::abs(z)))
    raise(errc::on_spectral_cut, "z lies on the spectral interval");
  RealMesh mesh = model_segment_mesh(model, contour.shape.re_entry,
                                     contour.quad, z.real(), dist);
  for (std::size_t j = contour.arc_count; j < contour.size(); ++j) {
    mesh.nodes.push_back(contour.nodes[j].real());
    mesh.weights.push_back(contour.weights[j].real());
  }
  return eval_M1_physical_on(model, mesh, z);
}

TransferEvaluation eval_M1_continued(const SpectralDensity& model,
                                     const Contour& contour, Complex z) {
  if (contour.too_close(z))
    raise(errc::near_contour, "z within the contour safety margin");

  const Index n = model.dim();
  TransferEvaluation ev;
  ev.z = z;
  ev.sheet = contour.sheet;
  ev.value = model.tilde_a1() - z * CMatrix::Identity(n, n) +
             contour_scalar_sum(model, contour.nodes, contour.weights,
                                [z](Complex mu) { return z / (z - mu); });
  ev.quadrature_residual =
      contour.tail_error_bound * (1.0 + 2.0 * std::abs(z)) +
      contour.tol_quad * (1.0 + std::abs(z));
  return ev;
}

CMatrix eval_V1_operator(const SpectralDensity& model, const Contour& contour,
                         const CMatrix& y) {
  const Index n = model.dim();
  if (y.rows() != n || y.cols() != n)
    raise(errc::invalid_operand, "argument dimension mismatch");

  ResolventFactors f = resolvent_factors(y);
  const double scale = 1.0 + y.cwiseAbs().maxCoeff();
  for (const Complex& mu : contour.nodes)
    for (Index i = 0; i < n; ++i)
      if (std::abs(f.lambda(i) - mu) < 1e-11 * scale)
        raise(errc::spectrum_meets_contour,
              "spectrum of the argument meets the contour");

  // batched rank-one accumulation: V1 = L * R * S^{-1}
  std::vector<DensityTerm> ts;
  std::vector<CVector> lcols;
  std::vector<Eigen::RowVectorXcd> rrows;
  for (std::size_t j = 0; j < contour.size(); ++j) {
    const Complex mu = contour.nodes[j];
    const Complex w = contour.weights[j];
    ts.clear();
    model.terms(mu, ts);
    for (const auto& t : ts) {
      Eigen::RowVectorXcd row = t.right.transpose() * f.s;
      for (Index i = 0; i < n; ++i) row(i) *= f.lambda(i) / (f.lambda(i) - mu);
      lcols.push_back((w * t.coef) * t.left);
      rrows.push_back(std::move(row));
    }
  }
  const Index tcount = static_cast<Index>(lcols.size());
  if (tcount == 0) return CMatrix::Zero(n, n);
  CMatrix l(n, tcount), r(tcount, n);
  for (Index k = 0; k < tcount; ++k) {
    l.col(k) = lcols[k];
    r.row(k) = rrows[k];
  }
  return l * (r * f.s_inv);
}

double v1_norm_bound(const SpectralDensity& model, const Contour& contour,
                     const CMatrix& y) {
  const Index n = y.rows();
  double sup = 0.0;
  for (const Complex& mu : contour.nodes) {
    CMatrix shifted = y - mu * CMatrix::Identity(n, n);
    Eigen::JacobiSVD<CMatrix> svd(shifted);
    const double smin = svd.singularValues()(n - 1);
    if (smin <= 0.0)
      raise(errc::spectrum_meets_contour, "argument singular at a node");
    sup = std::max(sup, (1.0 + std::abs(mu)) / smin);
  }
  return var1_on_contour(model, contour) * spectral_norm(y) * sup;
}

}  // namespace specont
