#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace specont {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kTolEig = 1e-10;   // relative accuracy of dense eigensolves
inline constexpr double kTailTarget = 1e-10;

// Failure modes of the numerical pipeline.  Each maps to a stable name used
// in diagnostics and to a CLI exit code.
enum class errc {
  invalid_operand,
  eig_failure,
  not_positive_semidefinite,
  outside_holomorphy_domain,
  endpoint_singularity,
  contour_outside_domain,
  contour_degenerate,
  unbounded_tail,
  divergent_variation,
  contour_touches_spectrum,
  no_admissible_contour,
  on_spectral_cut,
  near_contour,
  spectrum_meets_contour,
  no_convergence,
  not_admissible,
  bad_residue_contour,
  omega_singular,
  circle_not_isolating,
  unresolved_region,
  ill_conditioned_sample,
  config_error,
};

const char* errc_name(errc c);

class numeric_error : public std::runtime_error {
 public:
  numeric_error(errc c, const std::string& msg)
      : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code_(c) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc c, const std::string& msg) {
  throw numeric_error(c, msg);
}

}  // namespace specont
