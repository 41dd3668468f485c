#include "specont/model.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "specont/quadrature.hpp"

namespace specont {

namespace {

constexpr double kPi = 3.141592653589793238462643;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * kPi);

// Operator norm of sum_t coef_t * left_t * right_t^T via thin QR of the two
// factor blocks: |L R^T| = sigma_max(T_L T_R^T).
double norm_from_terms(const std::vector<DensityTerm>& terms, Index n) {
  const Index t = static_cast<Index>(terms.size());
  if (t == 0) return 0.0;
  CMatrix l(n, t), r(n, t);
  for (Index k = 0; k < t; ++k) {
    l.col(k) = terms[k].coef * terms[k].left;
    r.col(k) = terms[k].right;
  }
  Eigen::HouseholderQR<CMatrix> ql(l), qr(r);
  CMatrix tl = ql.matrixQR().topRows(t).triangularView<Eigen::Upper>();
  CMatrix tr = qr.matrixQR().topRows(t).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<CMatrix> svd(tl * tr.transpose());
  return svd.singularValues()(0);
}

}  // namespace

// ---------------------------------------------------------------------------
// DecayProfile

double DecayProfile::bound(double mu) const {
  switch (kind) {
    case Kind::exponential:
      return scale * std::exp(-p0 * mu);
    case Kind::gaussian: {
      const double d = mu - p0;
      return scale * std::exp(-0.5 * d * d / (p1 * p1));
    }
    case Kind::algebraic:
      return scale * std::pow(1.0 + mu, p1);
  }
  return 0.0;
}

bool DecayProfile::tail_converges(double theta) const {
  if (kind == Kind::algebraic) return theta - p1 > 1.0;
  return true;
}

double DecayProfile::tail_weighted(double theta, double lambda) const {
  if (scale == 0.0) return 0.0;
  const double w = std::pow(1.0 + lambda, -theta);
  switch (kind) {
    case Kind::exponential: {
      double rate = p0;
      if (theta < 0.0) rate -= -theta / (1.0 + lambda);
      if (rate <= 0.0) return std::numeric_limits<double>::infinity();
      return scale * std::exp(-p0 * lambda) * w / rate;
    }
    case Kind::gaussian: {
      const double d = lambda - p0;
      if (d <= p1) {
        // crude bound left of the useful range; callers push lambda out
        return scale * (std::abs(p0) + 4.0 * p1) * std::max(w, 1.0);
      }
      double v = scale * (p1 * p1 / d) * std::exp(-0.5 * d * d / (p1 * p1)) * w;
      if (theta < 0.0) v *= 2.0;
      return v;
    }
    case Kind::algebraic: {
      const double q = theta - p1;
      if (q <= 1.0) return std::numeric_limits<double>::infinity();
      return scale * std::pow(1.0 + lambda, 1.0 - q) / (q - 1.0);
    }
  }
  return 0.0;
}

double DecayProfile::lambda_for(double theta, double target, double lo) const {
  if (scale == 0.0) return lo;
  if (!tail_converges(theta))
    raise(errc::divergent_variation,
          "weighted tail diverges for theta=" + std::to_string(theta));
  double lambda = std::max(lo, 1.0);
  for (int it = 0; it < 4000; ++it) {
    if (tail_weighted(theta, lambda) <= target) return lambda;
    lambda *= 1.5;
    if (lambda > 1e300)
      raise(errc::unbounded_tail, "no finite truncation point reaches target");
  }
  raise(errc::unbounded_tail, "tail truncation search failed");
}

// ---------------------------------------------------------------------------
// HolDomain

bool HolDomain::contains_nonreal(Complex mu) const {
  const double im = std::abs(mu.imag());
  if (im <= 0.0) return false;
  switch (kind) {
    case Kind::strip:
      return im < height && mu.real() > alpha0 - margin;
    case Kind::parabola:
      return mu.real() > alpha0 - alpha * alpha + im * im / (4.0 * alpha * alpha);
  }
  return false;
}

bool HolDomain::evaluable(Complex mu) const {
  if (mu.imag() == 0.0) return mu.real() >= alpha0;
  return contains_nonreal(mu);
}

// ---------------------------------------------------------------------------
// SpectralDensity

void SpectralDensity::check_evaluable(Complex mu) const {
  if (mu.imag() == 0.0) {
    if (mu.real() == alpha0_)
      raise(errc::endpoint_singularity,
            "density evaluated at the endpoint alpha0");
    if (mu.real() < alpha0_)
      raise(errc::outside_holomorphy_domain,
            "real argument below the spectral interval");
    return;
  }
  if (!domain_.contains_nonreal(mu))
    raise(errc::outside_holomorphy_domain, "argument outside D^+/D^-");
}

CMatrix SpectralDensity::eval(Complex mu) const {
  check_evaluable(mu);
  return eval_unchecked(mu);
}

CMatrix SpectralDensity::eval_unchecked(Complex mu) const {
  std::vector<DensityTerm> ts;
  terms(mu, ts);
  CMatrix out = CMatrix::Zero(dim(), dim());
  for (const auto& t : ts) out.noalias() += t.coef * (t.left * t.right.transpose());
  return out;
}

CMatrix SpectralDensity::weighted_sum(std::span<const Complex> nodes,
                                      std::span<const Complex> coefs) const {
  CMatrix out = CMatrix::Zero(dim(), dim());
  std::vector<DensityTerm> ts;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    ts.clear();
    terms(nodes[j], ts);
    for (const auto& t : ts)
      out.noalias() += (coefs[j] * t.coef) * (t.left * t.right.transpose());
  }
  return out;
}

double SpectralDensity::value_norm(Complex mu) const {
  std::vector<DensityTerm> ts;
  terms(mu, ts);
  return norm_from_terms(ts, dim());
}

CMatrix SpectralDensity::weighted_sum_block(std::span<const Complex> nodes,
                                            std::span<const Complex> coefs,
                                            std::span<const Index> idx) const {
  const CMatrix full = weighted_sum(nodes, coefs);
  const Index m = static_cast<Index>(idx.size());
  CMatrix out(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < m; ++k) out(i, k) = full(idx[i], idx[k]);
  return out;
}

namespace {

class GenericBlockKernel final : public BlockKernel {
 public:
  GenericBlockKernel(const SpectralDensity& model,
                     std::span<const Complex> nodes, std::span<const Index> idx)
      : model_(model),
        nodes_(nodes.begin(), nodes.end()),
        idx_(idx.begin(), idx.end()) {}

  CMatrix eval(std::span<const Complex> coefs) const override {
    return model_.weighted_sum_block(nodes_, coefs, idx_);
  }

 private:
  const SpectralDensity& model_;
  std::vector<Complex> nodes_;
  std::vector<Index> idx_;
};

}  // namespace

std::unique_ptr<BlockKernel> SpectralDensity::block_kernel(
    std::span<const Complex> nodes, std::span<const Index> idx) const {
  return std::make_unique<GenericBlockKernel>(*this, nodes, idx);
}

CMatrix eval_density(const SpectralDensity& model, Complex mu) {
  return model.eval(mu);
}

CMatrix tilde_a1(const SpectralDensity& model) { return model.tilde_a1(); }

// ---------------------------------------------------------------------------
// ScalarProfile

Complex ScalarProfile::operator()(Complex x) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::constant:
      return amplitude;
    case Kind::gaussian: {
      const Complex d = x - center;
      return amplitude * std::exp(-0.5 * d * d / (sigma * sigma));
    }
    case Kind::exp_decay:
      return amplitude * std::exp(-rate * (x - center));
    case Kind::linexp:
      return amplitude * rate * (x - center) * std::exp(-rate * (x - center));
    case Kind::exp_abs:
    case Kind::bump:
      raise(errc::invalid_operand,
            "profile kind has no analytic continuation; spatial use only");
  }
  return 0.0;
}

double ScalarProfile::real_at(double x) const {
  if (cutoff > 0.0 && std::abs(x - center) >= cutoff) return 0.0;
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::constant:
      return amplitude;
    case Kind::gaussian: {
      const double d = x - center;
      return amplitude * std::exp(-0.5 * d * d / (sigma * sigma));
    }
    case Kind::exp_decay:
      return amplitude * std::exp(-rate * (x - center));
    case Kind::linexp:
      return amplitude * rate * (x - center) * std::exp(-rate * (x - center));
    case Kind::exp_abs:
      return amplitude * std::exp(-rate * std::abs(x - center));
    case Kind::bump: {
      const double u = (x - center) / width;
      if (std::abs(u) >= 1.0) return 0.0;
      return amplitude * std::exp(1.0 - 1.0 / (1.0 - u * u));
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// SeparableModel

SeparableModel::SeparableModel(double alpha0, CMatrix a1t, ScalarProfile phi,
                               CMatrix coupling, HolDomain domain)
    : tilde_a1_(std::move(a1t)), phi_(phi), coupling_(std::move(coupling)) {
  if (!(alpha0 > 0.0)) raise(errc::invalid_operand, "alpha0 must be positive");
  if (tilde_a1_.rows() != tilde_a1_.cols())
    raise(errc::invalid_operand, "tilde_a1 not square");
  if (!is_hermitian(tilde_a1_, 1e-12 * (1.0 + tilde_a1_.cwiseAbs().maxCoeff())))
    raise(errc::invalid_operand, "tilde_a1 not Hermitian");
  tilde_a1_ = 0.5 * (tilde_a1_ + tilde_a1_.adjoint()).eval();
  if (coupling_.cols() != tilde_a1_.rows())
    raise(errc::invalid_operand, "coupling column count must match dim");
  if (phi_.kind == ScalarProfile::Kind::bump ||
      phi_.kind == ScalarProfile::Kind::exp_abs)
    raise(errc::invalid_operand, "phi preset must be analytic");
  if (phi_.amplitude < 0.0) raise(errc::invalid_operand, "phi amplitude < 0");

  alpha0_ = alpha0;
  domain_ = domain;
  domain_.alpha0 = alpha0;
  gram_ = coupling_.adjoint() * coupling_;
  gram_norm_ = gram_.rows() > 0 ? spectral_norm(gram_) : 0.0;

  endpoint_exponent_ = 0.0;
  endpoint_constant_ = 1.0001 * phi_.amplitude * gram_norm_ + 1e-300;

  DecayProfile d;
  const double a = phi_.amplitude * gram_norm_;
  switch (phi_.kind) {
    case ScalarProfile::Kind::zero:
      d.kind = DecayProfile::Kind::exponential;
      d.scale = 0.0;
      d.p0 = 1.0;
      break;
    case ScalarProfile::Kind::exp_decay:
      d.kind = DecayProfile::Kind::exponential;
      d.scale = a * std::exp(phi_.rate * phi_.center);
      d.p0 = phi_.rate;
      break;
    case ScalarProfile::Kind::linexp:
      // (x-c) e^{-r(x-c)} <= (2/(e r)) e^{-(r/2)(x-c)}
      d.kind = DecayProfile::Kind::exponential;
      d.scale = a * (2.0 / (std::exp(1.0) * phi_.rate)) *
                std::exp(0.5 * phi_.rate * phi_.center);
      d.p0 = 0.5 * phi_.rate;
      break;
    case ScalarProfile::Kind::gaussian:
      d.kind = DecayProfile::Kind::gaussian;
      d.scale = a;
      d.p0 = phi_.center;
      d.p1 = phi_.sigma;
      break;
    default:
      raise(errc::invalid_operand, "unsupported phi preset");
  }
  decay_ = d;
}

void SeparableModel::terms(Complex mu, std::vector<DensityTerm>& out) const {
  const Complex p = phi_(mu);
  for (Index k = 0; k < coupling_.rows(); ++k) {
    DensityTerm t;
    t.coef = p;
    t.left = coupling_.row(k).adjoint();
    t.right = coupling_.row(k).transpose();
    out.push_back(std::move(t));
  }
}

CMatrix SeparableModel::eval_unchecked(Complex mu) const {
  return phi_(mu) * gram_;
}

CMatrix SeparableModel::weighted_sum(std::span<const Complex> nodes,
                                     std::span<const Complex> coefs) const {
  Complex acc = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) acc += coefs[j] * phi_(nodes[j]);
  return acc * gram_;
}

double SeparableModel::value_norm(Complex mu) const {
  return std::abs(phi_(mu)) * gram_norm_;
}

std::unique_ptr<SpectralDensity> SeparableModel::scaled(double s) const {
  return std::make_unique<SeparableModel>(alpha0_, tilde_a1_, phi_,
                                          CMatrix(s * coupling_), domain_);
}

// ---------------------------------------------------------------------------
// SchroedingerModel

SchroedingerModel::SchroedingerModel(double lambda0, double half_width,
                                     int n_points, ScalarProfile b,
                                     ScalarProfile a1, double decay_alpha,
                                     double decay_c)
    : b_profile_(b), a1_profile_(a1), half_width_(half_width), n_points_(n_points) {
  if (!(lambda0 > 0.0)) raise(errc::invalid_operand, "lambda0 must be positive");
  if (n_points < 2) raise(errc::invalid_operand, "need at least two grid points");
  if (!(half_width > 0.0)) raise(errc::invalid_operand, "half_width must be positive");
  if (!(decay_alpha > 0.0)) raise(errc::invalid_operand, "decay_alpha must be positive");

  alpha0_ = lambda0;
  domain_.kind = HolDomain::Kind::parabola;
  domain_.alpha0 = lambda0;
  domain_.alpha = decay_alpha;

  const int n = n_points;
  const double h = 2.0 * half_width / (n - 1);
  x_.resize(n);
  w_.resize(n);
  b_.resize(n);
  a1_.resize(n);
  for (int i = 0; i < n; ++i) {
    x_(i) = -half_width + i * h;
    w_(i) = (i == 0 || i == n - 1) ? 0.5 * h : h;
    b_(i) = b.real_at(x_(i));
    a1_(i) = a1.real_at(x_(i));
  }

  for (int i = 0; i < n; ++i) {
    if (std::abs(b_(i)) > decay_c * std::exp(-decay_alpha * std::abs(x_(i))) + 1e-14)
      raise(errc::invalid_operand, "coupling samples violate the decay bound");
  }

  tilde_a1_ = CMatrix::Zero(n, n);
  double min_ta = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double v = a1_(i) - b_(i) * b_(i);
    tilde_a1_(i, i) = v;
    min_ta = std::min(min_ta, v);
  }
  if (!(min_ta > lambda0))
    raise(errc::invalid_operand,
          "range of tilde_a1 must be embedded in (lambda0, inf)");

  bw_.resize(n);
  for (int i = 0; i < n; ++i) bw_(i) = b_(i) * std::sqrt(w_(i));
  b_norm_ = bw_.norm();

  bool full = true;
  for (int i = 0; i < n; ++i)
    if (b_(i) == 0.0) full = false;
  if (!full) {
    for (int i = 0; i < n; ++i)
      if (b_(i) != 0.0) support_.push_back(i);
  }

  endpoint_exponent_ = -0.5;
  endpoint_constant_ = 1.0001 * kInvSqrt2Pi * b_norm_ * b_norm_ + 1e-300;

  DecayProfile d;
  d.kind = DecayProfile::Kind::algebraic;
  d.scale = kInvSqrt2Pi * b_norm_ * b_norm_ * std::sqrt(2.0 + lambda0);
  d.p1 = -0.5;
  decay_ = d;
}

Complex SchroedingerModel::sqrt_branch(Complex mu) const {
  // principal branch: cut along (-inf, lambda0], positive on (lambda0, inf)
  return std::sqrt(mu - alpha0_);
}

CVector SchroedingerModel::b_plus(Complex mu) const {
  const Complex s = sqrt_branch(mu);
  const Complex i_s(-s.imag(), s.real());
  CVector v(x_.size());
  for (Index k = 0; k < x_.size(); ++k)
    v(k) = scale_ * bw_(k) * std::exp(i_s * x_(k));
  return v;
}

CVector SchroedingerModel::b_minus(Complex mu) const {
  const Complex s = sqrt_branch(mu);
  const Complex i_s(-s.imag(), s.real());
  CVector v(x_.size());
  for (Index k = 0; k < x_.size(); ++k)
    v(k) = scale_ * bw_(k) * std::exp(-i_s * x_(k));
  return v;
}

void SchroedingerModel::terms(Complex mu, std::vector<DensityTerm>& out) const {
  const Complex s = sqrt_branch(mu);
  const Complex c = 1.0 / (2.0 * std::sqrt(2.0 * kPi) * s);
  CVector u = b_plus(mu);
  CVector v = b_minus(mu);
  DensityTerm t1{c, u, v};
  DensityTerm t2{c, std::move(v), std::move(u)};
  out.push_back(std::move(t1));
  out.push_back(std::move(t2));
}

CMatrix SchroedingerModel::eval_unchecked(Complex mu) const {
  const Index n = dim();
  const Complex s = sqrt_branch(mu);
  const Complex c = 1.0 / (2.0 * std::sqrt(2.0 * kPi) * s);
  CVector u = b_plus(mu);
  CVector v = b_minus(mu);
  CMatrix out = CMatrix::Zero(n, n);
  if (support_.empty()) {
    out.noalias() = c * (u * v.transpose());
    out.noalias() += c * (v * u.transpose());
  } else {
    for (Index a : support_)
      for (Index b : support_) out(a, b) = c * (u(a) * v(b) + v(a) * u(b));
  }
  return out;
}

// Entries depend on grid indices only through their difference, so weighted
// sums collapse to one pass over the lag values with vectorized recurrences.
CVector SchroedingerModel::tau_lags(std::span<const Complex> nodes,
                                    std::span<const Complex> coefs,
                                    Index span) const {
  const double h = x_(1) - x_(0);
  const Index j_count = static_cast<Index>(nodes.size());
  CVector c(j_count), p(j_count), q(j_count);
  for (Index j = 0; j < j_count; ++j) {
    const Complex s = sqrt_branch(nodes[j]);
    c(j) = coefs[j] / (2.0 * std::sqrt(2.0 * kPi) * s);
    const Complex i_sh(-s.imag() * h, s.real() * h);
    p(j) = std::exp(i_sh);
    q(j) = std::exp(-i_sh);
  }
  CVector pd = CVector::Ones(j_count), qd = CVector::Ones(j_count);
  CVector tau(span + 1);
  for (Index d = 0; d <= span; ++d) {
    tau(d) = (c.array() * (pd.array() + qd.array())).sum();
    if (d < span) {
      pd.array() *= p.array();
      qd.array() *= q.array();
    }
  }
  return tau;
}

CMatrix SchroedingerModel::weighted_sum(std::span<const Complex> nodes,
                                        std::span<const Complex> coefs) const {
  const Index n = dim();
  Index lo = 0, hi = n - 1;
  if (!support_.empty()) {
    lo = support_.front();
    hi = support_.back();
  }
  const CVector tau = tau_lags(nodes, coefs, hi - lo);

  CMatrix out = CMatrix::Zero(n, n);
  const double s2 = scale_ * scale_;
  if (support_.empty()) {
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b)
        out(a, b) = s2 * bw_(a) * bw_(b) * tau(std::abs(a - b));
  } else {
    for (Index a : support_)
      for (Index b : support_)
        out(a, b) = s2 * bw_(a) * bw_(b) * tau(std::abs(a - b));
  }
  return out;
}

CMatrix SchroedingerModel::weighted_sum_block(std::span<const Complex> nodes,
                                              std::span<const Complex> coefs,
                                              std::span<const Index> idx) const {
  const Index m = static_cast<Index>(idx.size());
  if (m == 0) return CMatrix(0, 0);
  Index lo = idx[0], hi = idx[0];
  for (Index i : idx) {
    lo = std::min(lo, i);
    hi = std::max(hi, i);
  }
  const CVector tau = tau_lags(nodes, coefs, hi - lo);
  CMatrix out(m, m);
  const double s2 = scale_ * scale_;
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b)
      out(a, b) = s2 * bw_(idx[a]) * bw_(idx[b]) * tau(std::abs(idx[a] - idx[b]));
  return out;
}

double SchroedingerModel::value_norm(Complex mu) const {
  std::vector<DensityTerm> ts;
  terms(mu, ts);
  return norm_from_terms(ts, dim());
}

namespace {

// Lag tensor frozen over one node set: eval costs a single matvec.
class GridBlockKernel final : public BlockKernel {
 public:
  GridBlockKernel(CMatrix u, RVector bw_idx, std::vector<Index> idx, Index lo)
      : u_(std::move(u)), bw_(std::move(bw_idx)), idx_(std::move(idx)), lo_(lo) {}

  CMatrix eval(std::span<const Complex> coefs) const override {
    Eigen::Map<const CVector> c(coefs.data(), static_cast<Index>(coefs.size()));
    const CVector tau = u_ * c;
    const Index m = static_cast<Index>(idx_.size());
    CMatrix out(m, m);
    for (Index a = 0; a < m; ++a)
      for (Index b = 0; b < m; ++b)
        out(a, b) = bw_(a) * bw_(b) * tau(std::abs(idx_[a] - idx_[b]));
    return out;
  }

 private:
  CMatrix u_;  // (span+1) x nodes
  RVector bw_;
  std::vector<Index> idx_;
  Index lo_;
};

}  // namespace

std::unique_ptr<BlockKernel> SchroedingerModel::block_kernel(
    std::span<const Complex> nodes, std::span<const Index> idx) const {
  const Index m = static_cast<Index>(idx.size());
  if (m == 0) return SpectralDensity::block_kernel(nodes, idx);
  Index lo = idx[0], hi = idx[0];
  for (Index i : idx) {
    lo = std::min(lo, i);
    hi = std::max(hi, i);
  }
  const Index span = hi - lo;
  const Index j_count = static_cast<Index>(nodes.size());
  const double h = x_(1) - x_(0);
  CMatrix u(span + 1, j_count);
  for (Index j = 0; j < j_count; ++j) {
    const Complex s = sqrt_branch(nodes[j]);
    const Complex g = 1.0 / (2.0 * std::sqrt(2.0 * kPi) * s);
    const Complex i_sh(-s.imag() * h, s.real() * h);
    const Complex p = std::exp(i_sh);
    const Complex q = std::exp(-i_sh);
    Complex pd = 1.0, qd = 1.0;
    for (Index d = 0; d <= span; ++d) {
      u(d, j) = g * (pd + qd);
      pd *= p;
      qd *= q;
    }
  }
  RVector bw_idx(m);
  for (Index i = 0; i < m; ++i) bw_idx(i) = scale_ * bw_(idx[i]);
  std::vector<Index> iv(idx.begin(), idx.end());
  return std::make_unique<GridBlockKernel>(std::move(u), std::move(bw_idx),
                                           std::move(iv), lo);
}

std::unique_ptr<SpectralDensity> SchroedingerModel::scaled(double s) const {
  auto copy = std::make_unique<SchroedingerModel>(*this);
  // coupling scales by s with tilde_a1 held fixed (a1 absorbs the shift)
  copy->scale_ = scale_ * s;
  const double norm2 = copy->scale_ * copy->scale_ * bw_.squaredNorm();
  copy->b_norm_ = std::sqrt(norm2);
  copy->endpoint_constant_ = 1.0001 * kInvSqrt2Pi * norm2 + 1e-300;
  DecayProfile d = *decay_;
  d.scale = kInvSqrt2Pi * norm2 * std::sqrt(2.0 + alpha0_);
  copy->decay_ = d;
  return copy;
}

// ---------------------------------------------------------------------------
// DiscretizedFullMatrix

CMatrix DiscretizedFullMatrix::m1_discrete(Complex z) const {
  // tilde_a1 - z + sum_k z/(z-mu_k) G_k^* G_k, written via the A1 block
  CMatrix out = a1_block - z * CMatrix::Identity(n, n);
  for (Index k = 0; k < nodes.size(); ++k) {
    const CMatrix gram = couplings[k].adjoint() * couplings[k];
    out.noalias() += (nodes(k) / (z - nodes(k))) * gram;
  }
  return out;
}

CMatrix DiscretizedFullMatrix::schur_complement(Complex z) const {
  const Index d0 = dim0;
  CMatrix a0 = h.topLeftCorner(d0, d0) - z * CMatrix::Identity(d0, d0);
  CMatrix t01 = h.topRightCorner(d0, n);
  CMatrix t10 = h.bottomLeftCorner(n, d0);
  CMatrix a1 = h.bottomRightCorner(n, n) - z * CMatrix::Identity(n, n);
  if (d0 == 0) return a1;
  return a1 - t10 * a0.partialPivLu().solve(t01);
}

DiscretizedFullMatrix build_discretized_full_matrix(const SpectralDensity& model,
                                                    double lambda, int k_cells) {
  if (!(lambda > model.alpha0()))
    raise(errc::invalid_operand, "lambda must exceed alpha0");
  if (k_cells < 2) raise(errc::invalid_operand, "need at least two nodes");

  // realize the partition as a graded quadrature mesh with exactly k nodes
  int points = 1;
  for (int p = 8; p >= 1; --p) {
    if (k_cells % p == 0) {
      points = p;
      break;
    }
  }
  const int cells = k_cells / points;
  RealMesh mesh = graded_segment_mesh(model.alpha0(), lambda, cells, points,
                                      4.0, /*graded_levels=*/0);

  DiscretizedFullMatrix dfm;
  const Index n = model.dim();
  dfm.n = n;
  dfm.nodes = Eigen::Map<const RVector>(mesh.nodes.data(), mesh.nodes.size());
  dfm.weights = Eigen::Map<const RVector>(mesh.weights.data(), mesh.weights.size());

  CMatrix coupling_sum = CMatrix::Zero(n, n);
  Index dim0 = 0;
  dfm.couplings.reserve(mesh.size());
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    CMatrix cell = model.eval(mesh.nodes[k]) * mesh.weights[k];
    cell = 0.5 * (cell + cell.adjoint()).eval();
    const double norm = cell.cwiseAbs().maxCoeff();
    CMatrix g = psd_factor(cell, 1e-13 * std::max(1.0, norm));
    coupling_sum.noalias() += g.adjoint() * g;
    dim0 += g.rows();
    dfm.couplings.push_back(std::move(g));
  }
  dfm.dim0 = dim0;
  dfm.a1_block = model.tilde_a1() + coupling_sum;

  CMatrix h = CMatrix::Zero(dim0 + n, dim0 + n);
  Index off = 0;
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    const CMatrix& g = dfm.couplings[k];
    const Index r = g.rows();
    const double root = std::sqrt(mesh.nodes[k]);
    h.block(off, off, r, r) = mesh.nodes[k] * CMatrix::Identity(r, r);
    h.block(off, dim0, r, n) = root * g;
    h.block(dim0, off, n, r) = root * g.adjoint();
    off += r;
  }
  h.block(dim0, dim0, n, n) = dfm.a1_block;
  dfm.h = std::move(h);
  return dfm;
}

}  // namespace specont
