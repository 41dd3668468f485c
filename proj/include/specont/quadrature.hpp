#pragma once

#include <optional>
#include <vector>

#include "specont/types.hpp"

namespace specont {

// Gauss-Legendre rule on [-1, 1].  Nodes/weights are computed once per order
// and cached.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int n);

// A quadrature mesh on a real interval: nodes with positive weights.
struct RealMesh {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  void append(const RealMesh& other);
};

// Composite Gauss-Legendre on [a, b] under the grading map
// mu = a + (b - a) * sigma^power, which regularizes an endpoint singularity
// |mu - a|^gamma for gamma > -1 + 1/power.  `cells` are uniform in sigma;
// the first cell is further split `graded_levels` times toward sigma = 0.
RealMesh graded_segment_mesh(double a, double b, int cells, int points,
                             double power = 4.0, int graded_levels = 4);

// Same mesh, but with cells near `pole` bisected until their width is below
// half the distance to it (used when an integrand has a pole close to the
// interval).
RealMesh graded_segment_mesh_refined(double a, double b, int cells, int points,
                                     double power, int graded_levels,
                                     double pole_re, double pole_dist);

// Semi-infinite tail [M, Lambda] under mu = M - 1 + (1-u)^{-4} with composite
// Gauss-Legendre in u.  The map compresses algebraically decaying integrands
// (down to |f| ~ mu^{-3/2}) into a smooth integrand on [0, u_max].
RealMesh tail_mesh(double M, double Lambda, int cells, int points);

// Tail [M, Lambda] under mu = alpha0 + s^2 with uniform cells of width
// `s_cell` in s.  Used when the density carries bounded-frequency
// oscillations in s (grid models), which the rational map cannot resolve.
RealMesh tail_mesh_sqrt(double alpha0, double M, double Lambda, double s_cell,
                        int points);

// Segment [alpha0, to] under the same substitution, which removes the
// endpoint square-root singularity exactly.  Cells near pole_re are bisected
// until their mu-width drops below half the pole distance.
RealMesh sqrt_segment_mesh(double alpha0, double to, double s_cell, int points,
                           double pole_re, double pole_dist);

}  // namespace specont
