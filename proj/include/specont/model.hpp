#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "specont/operator_algebra.hpp"
#include "specont/types.hpp"

namespace specont {

// Upper bound for |K'_B(mu)| at large real mu, used to truncate semi-infinite
// integrals with a certified remainder.
struct DecayProfile {
  enum class Kind { exponential, gaussian, algebraic };
  Kind kind = Kind::exponential;
  double scale = 0.0;  // C
  double p0 = 0.0;     // rate / center / (unused)
  double p1 = 0.0;     // (unused) / sigma / power

  double bound(double mu) const;
  // Upper bound for  int_Lambda^inf (1+mu)^{-theta} |K'(mu)| dmu,
  // infinity if the tail diverges for this theta.
  double tail_weighted(double theta, double lambda) const;
  bool tail_converges(double theta) const;
  // Smallest Lambda with tail_weighted(theta, Lambda) <= target.
  double lambda_for(double theta, double target, double lo) const;
};

// Holomorphy domain D^+ of the density (D^- is its mirror image).
struct HolDomain {
  enum class Kind { strip, parabola };
  Kind kind = Kind::strip;
  double alpha0 = 0.0;
  double height = 0.0;  // strip: 0 < Im mu < height
  double margin = 0.0;  // strip: Re mu > alpha0 - margin
  double alpha = 0.0;   // parabola: Re mu > alpha0 - alpha^2 + (Im mu)^2/(4 alpha^2)

  // Membership of the open upper/lower half of the domain (mirror-symmetric).
  bool contains_nonreal(Complex mu) const;
  // Points where the density can be evaluated: Delta_0 = (alpha0, inf) plus
  // both halves.
  bool evaluable(Complex mu) const;
};

// One rank-one term coef * left * right^T of a density value.  The transpose
// (not adjoint) form is what survives analytic continuation.
struct DensityTerm {
  Complex coef;
  CVector left;
  CVector right;
};

// Reusable evaluator of sum_j coefs[j] K'_B(mu_j) restricted to an index
// block, for a frozen node set.  Implementations may precompute everything
// that does not depend on the coefficients.
class BlockKernel {
 public:
  virtual ~BlockKernel() = default;
  virtual CMatrix eval(std::span<const Complex> coefs) const = 0;
};

/// Operator-valued spectral density mu -> K'_B(mu), analytic on Delta_0 and
/// on the two neighboring half-domains.  Values on the real interval are
/// Hermitian PSD and obey [K'(mu)]^* = K'(conj mu) off the axis.
class SpectralDensity {
 public:
  virtual ~SpectralDensity() = default;

  double alpha0() const { return alpha0_; }
  const HolDomain& domain() const { return domain_; }
  double endpoint_exponent() const { return endpoint_exponent_; }
  double endpoint_constant() const { return endpoint_constant_; }
  const std::optional<DecayProfile>& decay() const { return decay_; }

  virtual Index dim() const = 0;
  virtual const CMatrix& tilde_a1() const = 0;

  /// K'_B(mu).  Throws outside_holomorphy_domain / endpoint_singularity.
  CMatrix eval(Complex mu) const;

  /// Low-rank terms of K'_B(mu), without the domain guard.
  virtual void terms(Complex mu, std::vector<DensityTerm>& out) const = 0;

  /// sum_j coefs[j] * K'_B(nodes[j]); models override with structured fills.
  virtual CMatrix weighted_sum(std::span<const Complex> nodes,
                               std::span<const Complex> coefs) const;

  /// The same sum restricted to a square index block (hot path of the
  /// determinant oracle).
  virtual CMatrix weighted_sum_block(std::span<const Complex> nodes,
                                     std::span<const Complex> coefs,
                                     std::span<const Index> idx) const;

  /// Frozen-node evaluator for repeated weighted sums over one node set.
  virtual std::unique_ptr<BlockKernel> block_kernel(
      std::span<const Complex> nodes, std::span<const Index> idx) const;

  /// |K'_B(mu)| without forming the dense matrix.
  virtual double value_norm(Complex mu) const;

  /// Same model with the coupling scaled by s (density scales by s^2,
  /// tilde_a1 unchanged).
  virtual std::unique_ptr<SpectralDensity> scaled(double s) const = 0;

  /// Index set outside of which every density value vanishes identically,
  /// or nullptr when the density is full.
  virtual const std::vector<Index>* support() const { return nullptr; }

  /// Half-width of the spatial grid when the density kernel oscillates like
  /// exp(±i sqrt(mu - alpha0) x); tells the quadrature to resolve the tail
  /// in the sqrt variable.
  virtual std::optional<double> spatial_extent() const { return std::nullopt; }

  void check_evaluable(Complex mu) const;

 protected:
  virtual CMatrix eval_unchecked(Complex mu) const;

  double alpha0_ = 1.0;
  HolDomain domain_;
  double endpoint_exponent_ = 0.0;
  double endpoint_constant_ = 1.0;
  std::optional<DecayProfile> decay_;
};

// Scalar profile used for the spectral weight phi and for the spatial
// samples b / a1.  The analytic kinds (gaussian, exp_decay, linexp) extend to
// complex arguments; exp_abs and bump are spatial-only.
struct ScalarProfile {
  enum class Kind { zero, constant, gaussian, exp_decay, linexp, exp_abs, bump };
  Kind kind = Kind::zero;
  double amplitude = 0.0;
  double rate = 1.0;    // exp_decay / linexp / exp_abs
  double center = 0.0;
  double sigma = 1.0;   // gaussian
  double width = 1.0;   // bump: support half-width
  // spatial-only hard cutoff radius (0 = none); meant to sit between grid
  // points, where it samples identically to a smooth cutoff
  double cutoff = 0.0;

  Complex operator()(Complex x) const;
  double real_at(double x) const;
};

/// K'_B(mu) = phi(mu) * G^* G with phi scalar analytic, >= 0 on (alpha0, inf).
class SeparableModel final : public SpectralDensity {
 public:
  SeparableModel(double alpha0, CMatrix tilde_a1, ScalarProfile phi,
                 CMatrix coupling, HolDomain domain);

  Index dim() const override { return tilde_a1_.rows(); }
  const CMatrix& tilde_a1() const override { return tilde_a1_; }
  void terms(Complex mu, std::vector<DensityTerm>& out) const override;
  CMatrix weighted_sum(std::span<const Complex> nodes,
                       std::span<const Complex> coefs) const override;
  double value_norm(Complex mu) const override;
  std::unique_ptr<SpectralDensity> scaled(double s) const override;

  Complex phi(Complex mu) const { return phi_(mu); }
  const CMatrix& coupling() const { return coupling_; }

 protected:
  CMatrix eval_unchecked(Complex mu) const override;

 private:
  CMatrix tilde_a1_;
  ScalarProfile phi_;
  CMatrix coupling_;  // r x n
  CMatrix gram_;      // G^* G
  double gram_norm_ = 0.0;
};

/// Grid discretization of the Schroedinger-type example: A_0 = D^2 + lambda0
/// on the line, couplings given by a multiplication operator b with (at
/// least) exponential decay.  The density kernel is degenerate of rank <= 2:
///   K'(mu; x, x') = (2 sqrt(2 pi) s)^{-1} [bt+(x) bt-(x') + bt-(x) bt+(x')],
///   bt±(mu, x) = exp(±i s x) b(x),  s = sqrt(mu - lambda0),
/// with the branch positive on (lambda0, inf), cut along (-inf, lambda0].
class SchroedingerModel final : public SpectralDensity {
 public:
  SchroedingerModel(double lambda0, double half_width, int n_points,
                    ScalarProfile b, ScalarProfile a1, double decay_alpha,
                    double decay_c);

  Index dim() const override { return x_.size(); }
  const CMatrix& tilde_a1() const override { return tilde_a1_; }
  void terms(Complex mu, std::vector<DensityTerm>& out) const override;
  CMatrix weighted_sum(std::span<const Complex> nodes,
                       std::span<const Complex> coefs) const override;
  CMatrix weighted_sum_block(std::span<const Complex> nodes,
                             std::span<const Complex> coefs,
                             std::span<const Index> idx) const override;
  std::unique_ptr<BlockKernel> block_kernel(
      std::span<const Complex> nodes,
      std::span<const Index> idx) const override;
  double value_norm(Complex mu) const override;
  std::unique_ptr<SpectralDensity> scaled(double s) const override;
  const std::vector<Index>* support() const override {
    return support_.empty() ? nullptr : &support_;
  }
  std::optional<double> spatial_extent() const override { return half_width_; }

  double lambda0() const { return alpha0_; }
  Complex sqrt_branch(Complex mu) const;
  // Weighted grid samples of bt±(mu, .); their l2 norms equal |b| for real mu.
  CVector b_plus(Complex mu) const;
  CVector b_minus(Complex mu) const;
  const RVector& grid() const { return x_; }
  const RVector& b_samples() const { return b_; }
  double grid_norm_b() const { return b_norm_; }

 protected:
  CMatrix eval_unchecked(Complex mu) const override;

 private:
  CVector tau_lags(std::span<const Complex> nodes,
                   std::span<const Complex> coefs, Index span) const;

  RVector x_, w_, sqrt_w_;  // grid, trapezoid weights
  RVector b_, a1_;
  RVector bw_;  // b_i * sqrt(w_i)
  CMatrix tilde_a1_;
  double b_norm_ = 0.0;
  std::vector<Index> support_;
  double scale_ = 1.0;
  ScalarProfile b_profile_, a1_profile_;
  double half_width_ = 0.0;
  int n_points_ = 0;
};

CMatrix eval_density(const SpectralDensity& model, Complex mu);
CMatrix tilde_a1(const SpectralDensity& model);

/// Finite Hermitian realization of the full 2x2 block matrix: the A0 block is
/// diagonalized on quadrature nodes mu_k with weights Delta_k and couplings
/// G_k from psd_factor(K'(mu_k) Delta_k).  Its resolvent's lower-right block
/// inverts the discrete transfer function exactly.
struct DiscretizedFullMatrix {
  RVector nodes;    // mu_k
  RVector weights;  // Delta_k
  std::vector<CMatrix> couplings;
  CMatrix a1_block;  // tilde_a1 + sum G_k^* G_k
  CMatrix h;         // assembled Hermitian block matrix
  Index n = 0;       // dim of the H1 space
  Index dim0 = 0;    // dim of the discretized A0 space

  CMatrix m1_discrete(Complex z) const;
  // Schur complement of the A0 block of (h - z).
  CMatrix schur_complement(Complex z) const;
};

DiscretizedFullMatrix build_discretized_full_matrix(const SpectralDensity& model,
                                                    double lambda, int k_cells);

}  // namespace specont
