#pragma once

#include <vector>

#include "specont/model.hpp"
#include "specont/quadrature.hpp"
#include "specont/types.hpp"

namespace specont {

struct ContourShape {
  double height = 0.3;    // semi-minor axis of the deformed arc
  double re_entry = 3.0;  // point where the contour returns to the real axis
};

struct QuadSpec {
  int points_per_segment = 16;  // Gauss points per arc / segment cell
  int tail_points = 12;         // Gauss points per tail cell
  int arc_cells = 16;
  int segment_cells = 12;  // cells of the shadow real mesh on [alpha0, M]
  int tail_cells = 32;
  double tail_target = kTailTarget;
  std::optional<double> lambda_tail_override;

  QuadSpec refined() const {
    QuadSpec q = *this;
    q.points_per_segment *= 2;
    q.tail_points *= 2;
    return q;
  }
};

/// A K_B-bounded contour Gamma_l: half-ellipse from alpha0 into D^l returning
/// to the real axis at re_entry, followed by the real tail [re_entry,
/// lambda_tail].  Nodes carry directed quadrature weights (including the
/// d(mu) direction); |weights| are the arc-length weights used by variation
/// integrals.  The shadow mesh covers [alpha0, re_entry] on the real axis and
/// shares the contour's tail nodes, so that deformed-vs-straight comparisons
/// cancel the common truncated tail exactly.
struct Contour {
  int sheet = +1;
  std::vector<Complex> nodes;
  std::vector<Complex> weights;
  std::vector<double> abs_weights;
  std::vector<double> local_scale;  // per-node cell-width / points
  std::size_t arc_count = 0;  // nodes[0..arc_count) lie on the deformed arc

  double alpha0 = 0.0;
  ContourShape shape;
  QuadSpec quad;
  double lambda_tail = 0.0;
  double tail_error_bound = 0.0;  // certified remainder of the truncated tail
  double tol_quad = 1e-8;         // declared quadrature tolerance

  Complex node(std::size_t j) const { return nodes[j]; }
  std::size_t size() const { return nodes.size(); }

  // 10x the local node spacing around the node nearest to z.
  double near_margin(Complex z) const;
  bool too_close(Complex z) const;
  // distance from z to the contour in excess of the safety margin
  double clearance(Complex z) const;
  // true if z lies strictly between the spectral interval and the arc
  bool encloses(Complex z) const;

  Contour mirrored() const;  // the conjugate contour on the other sheet
};

Contour build_contour(const SpectralDensity& model, int sheet,
                      const ContourShape& shape, const QuadSpec& quad);

// Truncated-tail mesh on [from, lambda_out] matched to the model's decay.
// Grid models get a sqrt-substituted mesh that resolves the kernel
// oscillation; smooth-decay models use the rational map.  bound_out receives
// the certified remainder of the (1+mu)^{-1}-weighted tail.
RealMesh model_tail_mesh(const SpectralDensity& model, double from,
                         const QuadSpec& quad, double* lambda_out,
                         double* bound_out);

// Mesh on [alpha0, to] matched to the model's endpoint behaviour, with cells
// near a pole at (pole_re, pole_dist) bisected for resolvent-type integrands.
RealMesh model_segment_mesh(const SpectralDensity& model, double to,
                            const QuadSpec& quad, double pole_re,
                            double pole_dist);

/// Var_theta(B) over [alpha0, Lambda] plus the certified tail bound beyond
/// Lambda.  Throws divergent_variation when the weighted tail diverges.
double var_theta_real(const SpectralDensity& model, double theta, double lambda);

/// Var_1(B, Gamma): sum of |w_j| (1+|mu_j|)^{-1} |K'(mu_j)| plus tail bound.
double var1_on_contour(const SpectralDensity& model, const Contour& contour);

struct AdmissibilityReport {
  double var1 = 0.0;
  double var_tilde = 0.0;
  double d0 = 0.0;
  double omega = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  bool condition1_ok = false;
  bool condition2_ok = false;
  double tilde_a1_norm = 0.0;
  double tol_quad = 0.0;            // declared tolerance of the contour
  double refinement_delta = 0.0;    // measured var change under refinement
  double tail_error_bound = 0.0;
  int sheet = +1;

  bool certified() const { return condition1_ok && condition2_ok; }
  // radius of the spectral-equality set O(tilde_a1, Gamma)
  double equality_radius() const { return 0.5 * d0 * (1.0 - var_tilde); }
};

/// All admissibility constants of Theorem-type smallness conditions:
/// d0 = dist(Gamma, spec tilde_a1) over nodes, the weighted variations, the
/// two condition booleans and the certified radii r_min < r_max.
AdmissibilityReport admissibility(const SpectralDensity& model,
                                  const Contour& contour);

/// Min of r_min over the admissible members of the family (an upper bound
/// for the optimal radius r_0).  Throws no_admissible_contour when empty.
double estimate_r0(const SpectralDensity& model,
                   const std::vector<Contour>& family);

}  // namespace specont
