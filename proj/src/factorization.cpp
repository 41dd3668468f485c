#include "specont/factorization.hpp"

#include <algorithm>
#include <cmath>

#include "specont/active.hpp"
#include "specont/operator_algebra.hpp"
#include "specont/transfer.hpp"

namespace specont {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

// The density vanishes off its support and tilde_a1 is diagonal there, so
// M1, W1, Omega and the projections all split into (scalar diagonal) ⊕
// (dense active block).  Everything below works on the active block and
// treats the complement analytically.
struct Split {
  const SpectralDensity* model = nullptr;
  ActiveSpace as;
  CMatrix a1_act;
  std::vector<std::vector<DensityTerm>> term_cache;  // per contour node

  static Split make(const SpectralDensity& model, const Contour& contour) {
    Split sp;
    sp.model = &model;
    sp.as = ActiveSpace::make(model);
    sp.a1_act = sp.as.reduced() ? sp.as.restrict_to_active(model.tilde_a1())
                                : model.tilde_a1();
    sp.term_cache.resize(contour.size());
    std::vector<DensityTerm> ts;
    for (std::size_t j = 0; j < contour.size(); ++j) {
      ts.clear();
      model.terms(contour.nodes[j], ts);
      for (auto& t : ts) {
        if (sp.as.reduced()) {
          t.left = sp.as.restrict_to_active(t.left);
          t.right = sp.as.restrict_to_active(t.right);
        }
      }
      sp.term_cache[j] = ts;
    }
    return sp;
  }

  Index act_dim() const { return a1_act.rows(); }

  CMatrix h1_act(const CMatrix& h1_full) const {
    return as.reduced() ? as.restrict_to_active(h1_full) : h1_full;
  }

  // M1(z, Gamma) restricted to the active block; goes through the model's
  // structured sum
  CMatrix m1_act(const Contour& contour, Complex z) const {
    std::vector<Complex> coefs(contour.size());
    for (std::size_t j = 0; j < contour.size(); ++j)
      coefs[j] = contour.weights[j] * z / (z - contour.nodes[j]);
    CMatrix out = model->weighted_sum_block(contour.nodes, coefs, as.idx);
    out += a1_act - z * CMatrix::Identity(act_dim(), act_dim());
    return out;
  }

  // norm of a full-space block-diagonal matrix given its active block and
  // the function producing the complement diagonal
  double full_norm(const CMatrix& act,
                   const std::function<Complex(double)>& rest_fn) const {
    double n = act.rows() > 0 ? spectral_norm(act) : 0.0;
    for (Index r = 0; r < as.rest_diag.size(); ++r)
      n = std::max(n, std::abs(rest_fn(as.rest_diag(r))));
    return n;
  }
};

void check_separation(const CVector& lambda, const Contour& contour,
                      double scale) {
  for (const Complex& mu : contour.nodes)
    for (Index i = 0; i < lambda.size(); ++i)
      if (std::abs(lambda(i) - mu) < 1e-11 * scale)
        raise(errc::spectrum_meets_contour,
              "operator spectrum meets the contour");
}

// Evaluator for W1(z) = I + sum_j w_j mu_j/(z - mu_j) K'(mu_j)(H1-mu_j)^{-1}.
// Everything except the z-dependent column scaling is assembled once.
struct W1Evaluator {
  CMatrix l0;          // act x T, columns w_j mu_j coef_t left_t
  CMatrix r_full;      // T x act, rows (right^T S) D_j S^{-1}
  std::vector<Complex> col_mu;

  W1Evaluator(const Split& sp, const Contour& contour,
              const ResolventFactors& f) {
    const Index n = sp.act_dim();
    Index tcount = 0;
    for (const auto& ts : sp.term_cache)
      tcount += static_cast<Index>(ts.size());
    l0.resize(n, tcount);
    CMatrix r1(tcount, n);
    col_mu.resize(tcount);
    Index k = 0;
    for (std::size_t j = 0; j < contour.size(); ++j) {
      const Complex mu = contour.nodes[j];
      const Complex w = contour.weights[j] * mu;
      for (const DensityTerm& t : sp.term_cache[j]) {
        Eigen::RowVectorXcd row = t.right.transpose() * f.s;
        for (Index i = 0; i < n; ++i) row(i) /= (f.lambda(i) - mu);
        l0.col(k) = (w * t.coef) * t.left;
        r1.row(k) = row;
        col_mu[k] = mu;
        ++k;
      }
    }
    r_full = r1 * f.s_inv;
  }

  CMatrix operator()(Complex z) const {
    const Index n = l0.rows();
    CMatrix out = CMatrix::Identity(n, n);
    if (l0.cols() == 0) return out;
    CMatrix lz = l0;
    for (Index k = 0; k < lz.cols(); ++k) lz.col(k) /= (z - col_mu[k]);
    out.noalias() += lz * r_full;
    return out;
  }
};

CMatrix omega_act(const Split& sp, const Contour& contour_l,
                  const ResolventFactors& fl, const ResolventFactors& fr) {
  const Index n = sp.act_dim();
  std::vector<CVector> lcols;
  std::vector<Eigen::RowVectorXcd> rrows;
  for (std::size_t j = 0; j < contour_l.size(); ++j) {
    const Complex mu = contour_l.nodes[j];
    const Complex w = contour_l.weights[j] * mu;
    for (const DensityTerm& t : sp.term_cache[j]) {
      CVector lv = fl.s_inv * t.left;
      for (Index i = 0; i < n; ++i) lv(i) /= (fl.lambda(i) - mu);
      Eigen::RowVectorXcd row = t.right.transpose() * fr.s;
      for (Index i = 0; i < n; ++i) row(i) /= (fr.lambda(i) - mu);
      lcols.push_back((w * t.coef) * (fl.s * lv));
      rrows.push_back(std::move(row));
    }
  }
  if (lcols.empty()) return CMatrix::Zero(n, n);
  const Index tcount = static_cast<Index>(lcols.size());
  CMatrix l(n, tcount), r(tcount, n);
  for (Index k = 0; k < tcount; ++k) {
    l.col(k) = lcols[k];
    r.row(k) = rrows[k];
  }
  return l * (r * fr.s_inv);
}

void check_circle_clears_contour(const Contour& contour, const CircleSpec& c,
                                 errc code) {
  for (const Complex& mu : contour.nodes) {
    const double d = std::abs(mu - c.center);
    if (d <= c.radius)
      raise(code, "contour node inside the residue circle");
    const Complex p = c.center + c.radius * (mu - c.center) / d;
    if (contour.too_close(p))
      raise(code, "residue circle within the contour safety margin");
  }
}

// trapezoid sums -(2 pi i)^{-1} oint z^m f(z) dz for scalar resolvents
// (a - z)^{-1}, one value of a per entry
CVector circle_scalar_resolvent(const RVector& a, const CircleSpec& circle,
                                int moment) {
  CVector out = CVector::Zero(a.size());
  for (int k = 0; k < circle.points; ++k) {
    const double theta = kTwoPi * k / circle.points;
    const Complex dir(std::cos(theta), std::sin(theta));
    const Complex z = circle.center + circle.radius * dir;
    Complex c = -circle.radius / static_cast<double>(circle.points) * dir;
    for (int m = 0; m < moment; ++m) c *= z;
    for (Index i = 0; i < a.size(); ++i) out(i) += c / (Complex(a(i), 0) - z);
  }
  return out;
}

CMatrix circle_resolvent_integral(const ResolventFactors& f,
                                  const CircleSpec& circle, int moment) {
  CVector diag = CVector::Zero(f.lambda.size());
  for (int k = 0; k < circle.points; ++k) {
    const double theta = kTwoPi * k / circle.points;
    const Complex dir(std::cos(theta), std::sin(theta));
    const Complex z = circle.center + circle.radius * dir;
    Complex c = -circle.radius / static_cast<double>(circle.points) * dir;
    for (int m = 0; m < moment; ++m) c *= z;
    for (Index i = 0; i < diag.size(); ++i) diag(i) += c / (f.lambda(i) - z);
  }
  return f.s * diag.asDiagonal() * f.s_inv;
}

}  // namespace

CMatrix circle_residue_integral(const CircleSpec& circle, int moment,
                                const std::function<CMatrix(Complex)>& f) {
  CMatrix acc;
  for (int k = 0; k < circle.points; ++k) {
    const double theta = kTwoPi * k / circle.points;
    const Complex dir(std::cos(theta), std::sin(theta));
    const Complex z = circle.center + circle.radius * dir;
    Complex c = -circle.radius / static_cast<double>(circle.points) * dir;
    for (int m = 0; m < moment; ++m) c *= z;
    CMatrix v = f(z);
    if (acc.size() == 0)
      acc = (c * v).eval();
    else
      acc.noalias() += c * v;
  }
  return acc;
}

CMatrix eval_W1(const SpectralDensity& model, const Contour& contour,
                const CMatrix& h1, Complex z) {
  if (contour.too_close(z))
    raise(errc::near_contour, "z within the contour safety margin");
  Split sp = Split::make(model, contour);
  CMatrix h_act = sp.h1_act(h1);
  ResolventFactors f = resolvent_factors(h_act);
  check_separation(f.lambda, contour, 1.0 + h1.cwiseAbs().maxCoeff());
  if (sp.as.reduced()) {
    for (const Complex& mu : contour.nodes)
      for (Index r = 0; r < sp.as.rest_diag.size(); ++r)
        if (std::abs(Complex(sp.as.rest_diag(r), 0) - mu) < 1e-11)
          raise(errc::spectrum_meets_contour,
                "operator spectrum meets the contour");
  }
  CMatrix act = W1Evaluator(sp, contour, f)(z);
  if (!sp.as.reduced()) return act;
  return sp.as.embed(act, CVector::Ones(static_cast<Index>(sp.as.rest.size())));
}

double w1_inverse_bound(const AdmissibilityReport& adm) {
  const double v = adm.var_tilde;
  const double den = 1.0 - 4.0 * v * (adm.d0 + adm.tilde_a1_norm) /
                               (adm.d0 * (1.0 + v) * (1.0 + v));
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / den;
}

double factorization_residual(const SpectralDensity& model,
                              const Contour& contour, const SolveReport& report,
                              std::span<const Complex> z_samples) {
  Split sp = Split::make(model, contour);
  CMatrix h_act = sp.h1_act(report.h1);
  ResolventFactors f = resolvent_factors(h_act);
  check_separation(f.lambda, contour, 1.0 + report.h1.cwiseAbs().maxCoeff());
  const Index n = sp.act_dim();
  W1Evaluator w1_eval(sp, contour, f);
  double worst = 0.0;
  for (const Complex& z : z_samples) {
    const CMatrix m1 = sp.m1_act(contour, z);
    const CMatrix w1 = w1_eval(z);
    const CMatrix rhs = w1 * (h_act - z * CMatrix::Identity(n, n));
    // the complement contributes exactly zero to the residual
    const double m1_norm =
        sp.full_norm(m1, [&](double a) { return Complex(a, 0) - z; });
    worst = std::max(worst, spectral_norm(m1 - rhs) / (1.0 + m1_norm));
  }
  return worst;
}

CMatrix compute_Omega(const SpectralDensity& model, const Contour& contour_l,
                      const CMatrix& h1_l, const CMatrix& h1_minus_l) {
  Split sp = Split::make(model, contour_l);
  ResolventFactors fr = resolvent_factors(sp.h1_act(h1_l));
  ResolventFactors fl = resolvent_factors(sp.h1_act(h1_minus_l).adjoint());
  check_separation(fr.lambda, contour_l, 1.0 + h1_l.cwiseAbs().maxCoeff());
  check_separation(fl.lambda, contour_l, 1.0 + h1_minus_l.cwiseAbs().maxCoeff());
  CMatrix act = omega_act(sp, contour_l, fl, fr);
  if (!sp.as.reduced()) return act;
  return sp.as.embed_zero(act);
}

IdentityResiduals omega_identities(const SpectralDensity& model,
                                   const Contour& contour_l,
                                   const Contour& contour_minus_l,
                                   const SolveReport& rep_l,
                                   const SolveReport& rep_minus_l,
                                   const CircleSpec& gamma) {
  Split sp = Split::make(model, contour_l);
  Split sp_ml = Split::make(model, contour_minus_l);
  const Index n = sp.act_dim();
  IdentityResiduals out;

  const CMatrix h_l = sp.h1_act(rep_l.h1);
  const CMatrix h_ml = sp.h1_act(rep_minus_l.h1);
  ResolventFactors f_l = resolvent_factors(h_l);
  ResolventFactors f_ml = resolvent_factors(h_ml);
  ResolventFactors f_l_star = resolvent_factors(CMatrix(h_l.adjoint()));
  ResolventFactors f_ml_star = resolvent_factors(CMatrix(h_ml.adjoint()));
  check_separation(f_l.lambda, contour_l, 1.0 + h_l.cwiseAbs().maxCoeff());
  check_separation(f_ml_star.lambda, contour_l, 1.0 + h_ml.cwiseAbs().maxCoeff());

  CMatrix omega = omega_act(sp, contour_l, f_ml_star, f_l);
  CMatrix omega_ml = omega_act(sp_ml, contour_minus_l, f_l_star, f_ml);
  out.omega_norm = spectral_norm(omega);
  out.omega_conj = spectral_norm(omega_ml - omega.adjoint());

  CMatrix i_plus = CMatrix::Identity(n, n) + omega;
  Eigen::PartialPivLU<CMatrix> lu(i_plus);
  if (lu.rcond() < 1e-14)
    raise(errc::omega_singular, "I + Omega numerically singular");
  CMatrix inv_i_plus = lu.inverse();

  // gamma must enclose all of spec(H1), stay inside the equality set and
  // clear the contour
  {
    for (Index i = 0; i < n; ++i)
      if (std::abs(f_l.lambda(i) - gamma.center) >= gamma.radius * (1.0 - 1e-9))
        raise(errc::bad_residue_contour,
              "gamma does not enclose the full spectrum of H1");
    for (Index r = 0; r < sp.as.rest_diag.size(); ++r)
      if (std::abs(Complex(sp.as.rest_diag(r), 0) - gamma.center) >=
          gamma.radius * (1.0 - 1e-9))
        raise(errc::bad_residue_contour,
              "gamma does not enclose the full spectrum of H1");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(model.tilde_a1());
    const double rho = rep_l.admissibility.equality_radius();
    for (int k = 0; k < 720; ++k) {
      const double th = kTwoPi * k / 720;
      const Complex z = gamma.center +
                        gamma.radius * Complex(std::cos(th), std::sin(th));
      double d = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < es.eigenvalues().size(); ++i)
        d = std::min(d, std::abs(z - Complex(es.eigenvalues()(i), 0.0)));
      if (d > rho * (1.0 + 1e-9))
        raise(errc::bad_residue_contour,
              "gamma leaves the spectral-equality set");
    }
    check_circle_clears_contour(contour_l, gamma, errc::bad_residue_contour);
  }

  auto m1_inv_act = [&](Complex z) -> CMatrix {
    return sp.m1_act(contour_l, z).partialPivLu().inverse();
  };
  const CMatrix c0 = circle_residue_integral(gamma, 0, m1_inv_act);
  const CMatrix c1 = circle_residue_integral(gamma, 1, m1_inv_act);
  const CVector c0_rest = circle_scalar_resolvent(sp.as.rest_diag, gamma, 0);
  const CVector c1_rest = circle_scalar_resolvent(sp.as.rest_diag, gamma, 1);

  // Eq-level residuals, active block plus complement diagonal
  auto block_norm = [&](const CMatrix& act_diff, const CVector& rest_diff) {
    double v = act_diff.rows() > 0 ? spectral_norm(act_diff) : 0.0;
    for (Index r = 0; r < rest_diff.size(); ++r)
      v = std::max(v, std::abs(rest_diff(r)));
    return v;
  };

  CVector rest_m(sp.as.rest_diag.size());
  for (Index r = 0; r < rest_m.size(); ++r) rest_m(r) = c0_rest(r) - 1.0;
  out.m_omega = block_norm(c0 - inv_i_plus, rest_m);

  const CMatrix h_ml_star = h_ml.adjoint();
  CVector rest_h(sp.as.rest_diag.size());
  for (Index r = 0; r < rest_h.size(); ++r)
    rest_h(r) = c1_rest(r) - Complex(sp.as.rest_diag(r), 0);
  out.h_omega = std::max(block_norm(c1 - inv_i_plus * h_ml_star, rest_h),
                         block_norm(c1 - h_l * inv_i_plus, rest_h));

  CMatrix i_plus_ml = CMatrix::Identity(n, n) + omega_ml;
  Eigen::PartialPivLU<CMatrix> lu_ml(i_plus_ml);
  if (lu_ml.rcond() < 1e-14)
    raise(errc::omega_singular, "I + Omega^(-l) numerically singular");
  out.similarity = spectral_norm(h_l.adjoint() -
                                 i_plus_ml * h_ml * lu_ml.inverse());
  return out;
}

EigenResidueRecord eigenprojection_residues(const SpectralDensity& model,
                                            const Contour& contour_l,
                                            const Contour& contour_minus_l,
                                            const SolveReport& rep_l,
                                            const SolveReport& rep_minus_l,
                                            Complex lambda,
                                            const CircleSpec& small_circle) {
  Split sp = Split::make(model, contour_l);
  EigenResidueRecord rec;
  rec.lambda = lambda;

  const CMatrix h_l = sp.h1_act(rep_l.h1);
  const CMatrix h_ml = sp.h1_act(rep_minus_l.h1);
  ResolventFactors f_l = resolvent_factors(h_l);
  ResolventFactors f_ml_star = resolvent_factors(CMatrix(h_ml.adjoint()));

  const double scale = 1.0 + std::abs(lambda);
  if (std::abs(lambda - small_circle.center) >= small_circle.radius)
    raise(errc::circle_not_isolating, "lambda not inside the circle");
  int multiplicity = 0;
  auto count_inside = [&](Complex ev) {
    const double d = std::abs(ev - small_circle.center);
    if (d < small_circle.radius * (1.0 + 1e-12)) {
      if (std::abs(ev - lambda) > 1e-8 * scale)
        raise(errc::circle_not_isolating,
              "another eigenvalue lies inside the circle");
      ++multiplicity;
    }
  };
  for (Index i = 0; i < f_l.lambda.size(); ++i) count_inside(f_l.lambda(i));
  for (Index r = 0; r < sp.as.rest_diag.size(); ++r)
    count_inside(Complex(sp.as.rest_diag(r), 0));
  if (multiplicity == 0)
    raise(errc::circle_not_isolating, "no eigenvalue inside the circle");
  check_circle_clears_contour(contour_l, small_circle,
                              errc::circle_not_isolating);

  const CMatrix p_act = circle_resolvent_integral(f_l, small_circle, 0);
  const CMatrix p_star_act = circle_resolvent_integral(f_ml_star, small_circle, 0);
  const CMatrix p_m1_act = circle_residue_integral(
      small_circle, 0, [&](Complex z) -> CMatrix {
        return sp.m1_act(contour_l, z).partialPivLu().inverse();
      });
  const CVector p_rest = circle_scalar_resolvent(sp.as.rest_diag, small_circle, 0);

  CMatrix omega = omega_act(sp, contour_l, f_ml_star, f_l);
  CMatrix i_plus = CMatrix::Identity(sp.act_dim(), sp.act_dim()) + omega;
  Eigen::PartialPivLU<CMatrix> lu(i_plus);
  if (lu.rcond() < 1e-14)
    raise(errc::omega_singular, "I + Omega numerically singular");
  CMatrix inv_i_plus = lu.inverse();

  rec.relation_a = spectral_norm(p_m1_act - p_act * inv_i_plus);
  rec.relation_b = spectral_norm(p_m1_act - inv_i_plus * p_star_act);
  rec.idempotency = spectral_norm(p_act * p_act - p_act);
  rec.commutation = spectral_norm(p_act * h_l - h_l * p_act);
  Complex tr = p_act.trace();
  for (Index r = 0; r < p_rest.size(); ++r) tr += p_rest(r);
  rec.trace_deviation = std::abs(tr - Complex(multiplicity, 0.0));

  if (sp.as.reduced()) {
    rec.proj_h1 = sp.as.embed(p_act, p_rest);
    rec.proj_h1_star = sp.as.embed(p_star_act, p_rest);
    rec.proj_m1 = sp.as.embed(p_m1_act, p_rest);
  } else {
    rec.proj_h1 = p_act;
    rec.proj_h1_star = p_star_act;
    rec.proj_m1 = p_m1_act;
  }
  return rec;
}

double adjoint_relation_residual(const SpectralDensity& model,
                                 const Contour& contour_l,
                                 const Contour& contour_minus_l,
                                 const SolveReport& rep_l,
                                 const SolveReport& rep_minus_l,
                                 std::span<const Complex> z_samples) {
  Split sp = Split::make(model, contour_l);
  Split sp_ml = Split::make(model, contour_minus_l);
  const Index n = sp.act_dim();
  const CMatrix h_l = sp.h1_act(rep_l.h1);
  const CMatrix h_ml = sp.h1_act(rep_minus_l.h1);
  ResolventFactors f_l = resolvent_factors(h_l);
  ResolventFactors f_ml = resolvent_factors(h_ml);
  const CMatrix h_star = h_ml.adjoint();
  W1Evaluator w1_l(sp, contour_l, f_l);
  W1Evaluator w1_ml(sp_ml, contour_minus_l, f_ml);
  double worst = 0.0;
  for (const Complex& z : z_samples) {
    const CMatrix lhs = w1_l(z) * (h_l - z * CMatrix::Identity(n, n));
    const CMatrix w_conj = w1_ml(std::conj(z));
    const CMatrix rhs =
        (h_star - z * CMatrix::Identity(n, n)) * w_conj.adjoint();
    // complement entries agree exactly: (a - z) = (a - z) * 1
    worst = std::max(worst, spectral_norm(lhs - rhs));
  }
  return worst;
}

CircleSpec default_gamma_circle(const AdmissibilityReport& adm,
                                const std::vector<double>& tilde_a1_eigs,
                                std::span<const Complex> h1_spectrum,
                                int points) {
  if (tilde_a1_eigs.empty())
    raise(errc::bad_residue_contour, "empty spectrum");
  const double lo = *std::min_element(tilde_a1_eigs.begin(), tilde_a1_eigs.end());
  const double hi = *std::max_element(tilde_a1_eigs.begin(), tilde_a1_eigs.end());
  const Complex center(0.5 * (lo + hi), 0.0);
  const double rho = adm.equality_radius();

  double r_needed = 0.0;
  for (const Complex& l : h1_spectrum)
    r_needed = std::max(r_needed, std::abs(l - center));
  r_needed *= 1.02;
  r_needed += 1e-3 * rho;

  // largest radius whose circle stays inside the spectral-equality set
  auto inside = [&](double r) {
    for (int k = 0; k < 720; ++k) {
      const double th = kTwoPi * k / 720;
      const Complex z = center + r * Complex(std::cos(th), std::sin(th));
      double d = std::numeric_limits<double>::infinity();
      for (double e : tilde_a1_eigs) d = std::min(d, std::abs(z - e));
      if (d > rho) return false;
    }
    return true;
  };
  double r_max = rho + 0.5 * (hi - lo);
  while (r_max > r_needed && !inside(r_max)) r_max *= 0.97;
  if (r_max <= r_needed)
    raise(errc::bad_residue_contour,
          "no circle encloses the spectrum inside the equality set");
  CircleSpec c;
  c.center = center;
  // keep the enclosed spectrum well away from the circle; the trapezoid
  // error scales like (R0/R)^points
  c.radius = r_needed + 0.8 * (r_max - r_needed);
  c.points = points;
  return c;
}

}  // namespace specont
