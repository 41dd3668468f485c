#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "specont/contour.hpp"
#include "specont/model.hpp"
#include "specont/solver.hpp"
#include "specont/types.hpp"

namespace specont {

struct RootSearchRegion {
  double re_min = 0.0, re_max = 0.0;
  double im_min = 0.0, im_max = 0.0;
  int grid_density = 8;        // boundary samples per edge at the first pass
  double refine_tol = 1e-10;   // target |det| relative after Newton
  double min_cell = 1e-6;      // below this an unstable winding is an error
};

struct TransferZero {
  Complex location;
  int multiplicity = 1;
  double det_rel = 0.0;  // |det| at the zero relative to the box boundary
};

/// All zeros of det M1(., Gamma_l) in the rectangle, located by winding
/// numbers of the log-determinant over sub-rectangle boundaries and refined
/// by (multiplicity-aware) Newton on the determinant.  Independent of the
/// fixed-point solver; shares only the transfer evaluation itself.
std::vector<TransferZero> find_transfer_zeros(const SpectralDensity& model,
                                              const Contour& contour,
                                              const RootSearchRegion& region);

/// max_z |[M1_d(z)]^{-1} - R11(z)| / |[M1_d(z)]^{-1}| where R11 is the
/// lower-right block of (H - z)^{-1}: the resolvent/Schur-complement identity
/// of the discretized full matrix.
double schur_identity_check(const DiscretizedFullMatrix& dfm,
                            std::span<const Complex> z_samples);

struct SweepRow {
  double s = 0.0;
  int branch = -1;
  Complex lambda;
  bool certified = false;
  double r_min = 0.0;
  bool inside_equality_set = false;
  bool solve_failed = false;
};

/// Coupling-constant sweep: solve at each scale s, match eigenvalue branches
/// across steps by nearest-neighbor continuation.  Per-step failures are
/// recorded in the rows rather than thrown.
std::vector<SweepRow> resonance_sweep(const SpectralDensity& model,
                                      const ContourShape& shape,
                                      const QuadSpec& quad, int sheet,
                                      double s_max, int steps,
                                      const SolveOptions& opts = {});

// log det M1(z, Gamma) with caching; the workhorse of the winding search.
class TransferLogDet {
 public:
  TransferLogDet(const SpectralDensity& model, const Contour& contour);
  Complex operator()(Complex z) const;
  std::size_t evaluations() const { return evals_; }

 private:
  const SpectralDensity& model_;
  const Contour& contour_;
  std::vector<Index> act_idx_;
  RVector rest_diag_;
  CMatrix a_act_;
  std::unique_ptr<BlockKernel> kernel_;
  mutable std::map<std::pair<double, double>, Complex> cache_;
  mutable std::size_t evals_ = 0;
};

}  // namespace specont
