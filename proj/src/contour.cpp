#include "specont/contour.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace specont {

namespace {

constexpr double kPi = 3.141592653589793238462643;

std::vector<std::pair<double, double>> unit_cells(int cells, int graded_levels) {
  std::vector<std::pair<double, double>> out;
  const double w = 1.0 / cells;
  double lo = 0.0;
  for (int l = graded_levels; l >= 1; --l) {
    const double e = w * std::pow(0.5, l);
    out.emplace_back(lo, e);
    lo = e;
  }
  out.emplace_back(lo, w);
  for (int c = 1; c < cells; ++c) out.emplace_back(c * w, (c + 1) * w);
  return out;
}

std::vector<double> hermitian_spectrum(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  if (es.info() != Eigen::Success)
    raise(errc::eig_failure, "hermitian eigensolver did not converge");
  std::vector<double> out(es.eigenvalues().data(),
                          es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

double dist_to_reals(Complex z, const std::vector<double>& pts) {
  double d = std::numeric_limits<double>::infinity();
  for (double p : pts) d = std::min(d, std::abs(z - p));
  return d;
}

struct VariationSums {
  double var1 = 0.0;
  double var_tilde = 0.0;
};

VariationSums variation_sums(const SpectralDensity& model, const Contour& contour,
                             const std::vector<double>& a1_eigs) {
  VariationSums s;
  for (std::size_t j = 0; j < contour.size(); ++j) {
    const Complex mu = contour.nodes[j];
    const double nrm = model.value_norm(mu);
    const double aw = contour.abs_weights[j];
    s.var1 += aw * nrm / (1.0 + std::abs(mu));
    s.var_tilde += aw * nrm / dist_to_reals(mu, a1_eigs);
  }
  return s;
}

}  // namespace

double Contour::near_margin(Complex z) const {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double d = std::abs(z - nodes[j]);
    if (d < bd) {
      bd = d;
      best = j;
    }
  }
  return 10.0 * local_scale[best];
}

bool Contour::too_close(Complex z) const { return clearance(z) < 0.0; }

double Contour::clearance(Complex z) const {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double d = std::abs(z - nodes[j]);
    if (d < bd) {
      bd = d;
      best = j;
    }
  }
  return bd - 10.0 * local_scale[best];
}

bool Contour::encloses(Complex z) const {
  if (sheet > 0 ? (z.imag() <= 0.0) : (z.imag() >= 0.0)) return false;
  const double c = 0.5 * (alpha0 + shape.re_entry);
  const double a = 0.5 * (shape.re_entry - alpha0);
  const double dx = (z.real() - c) / a;
  if (std::abs(dx) >= 1.0) return false;
  const double cap = shape.height * std::sqrt(1.0 - dx * dx);
  return std::abs(z.imag()) < cap;
}

Contour Contour::mirrored() const {
  Contour m = *this;
  m.sheet = -sheet;
  for (auto& z : m.nodes) z = std::conj(z);
  for (auto& w : m.weights) w = std::conj(w);
  return m;
}

RealMesh model_tail_mesh(const SpectralDensity& model, double from,
                         const QuadSpec& quad, double* lambda_out,
                         double* bound_out) {
  if (!model.decay())
    raise(errc::unbounded_tail, "model provides no decay profile for the tail");
  const DecayProfile& decay = *model.decay();
  if (!decay.tail_converges(1.0))
    raise(errc::unbounded_tail, "Var_1 tail diverges; no K_B-bounded contour");

  const std::optional<double> extent = model.spatial_extent();
  double lambda;
  if (quad.lambda_tail_override) {
    lambda = std::max(*quad.lambda_tail_override, from + 1.0);
  } else {
    lambda = decay.lambda_for(1.0, quad.tail_target, from + 1.0);
    if (extent && decay.kind == DecayProfile::Kind::algebraic) {
      // cap the node count; the certified remainder is reported instead of
      // forced below the default target
      const double s_cell = std::min(0.5, 4.0 / *extent);
      const double s0 = std::sqrt(from - model.alpha0());
      const double s_cap = s0 + 1200.0 * s_cell;
      lambda = std::min(lambda, model.alpha0() + s_cap * s_cap);
    }
  }
  if (bound_out) *bound_out = decay.tail_weighted(1.0, lambda);
  if (lambda_out) *lambda_out = lambda;

  if (extent && decay.kind == DecayProfile::Kind::algebraic) {
    const double s_cell = std::min(0.5, 4.0 / *extent);
    return tail_mesh_sqrt(model.alpha0(), from, lambda, s_cell,
                          quad.tail_points);
  }
  return tail_mesh(from, lambda, quad.tail_cells, quad.tail_points);
}

RealMesh model_segment_mesh(const SpectralDensity& model, double to,
                            const QuadSpec& quad, double pole_re,
                            double pole_dist) {
  const std::optional<double> extent = model.spatial_extent();
  if (extent) {
    const double s_cell = std::min(0.5, 4.0 / *extent);
    return sqrt_segment_mesh(model.alpha0(), to, s_cell,
                             quad.points_per_segment, pole_re, pole_dist);
  }
  return graded_segment_mesh_refined(model.alpha0(), to, quad.segment_cells,
                                     quad.points_per_segment, 4.0, 4, pole_re,
                                     pole_dist);
}

Contour build_contour(const SpectralDensity& model, int sheet,
                      const ContourShape& shape, const QuadSpec& quad) {
  if (sheet != 1 && sheet != -1)
    raise(errc::invalid_operand, "sheet index must be +1 or -1");
  if (!(shape.height > 0.0))
    raise(errc::contour_degenerate, "arc height must be positive");
  if (!(shape.re_entry > model.alpha0()))
    raise(errc::contour_degenerate, "re-entry point must exceed alpha0");

  Contour c;
  c.sheet = sheet;
  c.alpha0 = model.alpha0();
  c.shape = shape;
  c.quad = quad;

  // Deformed arc: half-ellipse parametrized by t in [0, pi].  The endpoint
  // singularity of the density sits at t = 0, so the first cell is traversed
  // under the regularizing map t = t_first sigma^4; the remaining cells use
  // plain composite Gauss-Legendre in t.
  const double mid = 0.5 * (model.alpha0() + shape.re_entry);
  const double a = 0.5 * (shape.re_entry - model.alpha0());
  const double h = shape.height;
  const GaussRule& gl = gauss_legendre(quad.points_per_segment);
  auto emit_arc_node = [&](double t, double jac, double cell_span) {
    const Complex mu(mid - a * std::cos(t), sheet * h * std::sin(t));
    const Complex dmu_dt(a * std::sin(t), sheet * h * std::cos(t));
    c.nodes.push_back(mu);
    c.weights.push_back(dmu_dt * jac);
    c.local_scale.push_back(std::abs(dmu_dt) * cell_span /
                            quad.points_per_segment);
  };
  const double t_first = kPi / quad.arc_cells;
  for (const auto& [s0, s1] : unit_cells(4, 4)) {
    const double half = 0.5 * (s1 - s0);
    const double cmid = 0.5 * (s1 + s0);
    for (int i = 0; i < quad.points_per_segment; ++i) {
      const double sigma = cmid + half * gl.nodes[i];
      const double t = t_first * std::pow(sigma, 4.0);
      const double dt_dsigma = t_first * 4.0 * std::pow(sigma, 3.0);
      emit_arc_node(t, dt_dsigma * gl.weights[i] * half,
                    dt_dsigma * (s1 - s0));
    }
  }
  for (int cell = 1; cell < quad.arc_cells; ++cell) {
    const double t0 = cell * t_first;
    const double t1 = (cell + 1) * t_first;
    const double half = 0.5 * (t1 - t0);
    const double cmid = 0.5 * (t1 + t0);
    for (int i = 0; i < quad.points_per_segment; ++i) {
      const double t = cmid + half * gl.nodes[i];
      emit_arc_node(t, gl.weights[i] * half, t1 - t0);
    }
  }
  c.arc_count = c.nodes.size();

  for (const Complex& mu : c.nodes) {
    if (!model.domain().contains_nonreal(mu))
      raise(errc::contour_outside_domain,
            "deformed arc leaves the holomorphy domain");
  }

  RealMesh tail = model_tail_mesh(model, shape.re_entry, quad, &c.lambda_tail,
                                  &c.tail_error_bound);
  for (std::size_t j = 0; j < tail.size(); ++j) {
    c.nodes.push_back(Complex(tail.nodes[j], 0.0));
    c.weights.push_back(Complex(tail.weights[j], 0.0));
    // effective mu-width of the surrounding tail cell
    const std::size_t cell = j / quad.tail_points;
    const std::size_t lo = cell * quad.tail_points;
    const std::size_t hi = std::min(tail.size(), lo + quad.tail_points) - 1;
    const double span = (tail.nodes[hi] - tail.nodes[lo]) *
                        (1.0 + 2.0 / quad.tail_points);
    c.local_scale.push_back(span / quad.tail_points);
  }

  c.abs_weights.resize(c.nodes.size());
  for (std::size_t j = 0; j < c.nodes.size(); ++j)
    c.abs_weights[j] = std::abs(c.weights[j]);
  return c;
}

double var_theta_real(const SpectralDensity& model, double theta, double lambda) {
  if (!(lambda > model.alpha0()))
    raise(errc::invalid_operand, "lambda must exceed alpha0");
  if (model.endpoint_exponent() <= -1.0)
    raise(errc::divergent_variation, "endpoint singularity not integrable");

  double tail = 0.0;
  if (model.decay()) {
    if (!model.decay()->tail_converges(theta))
      raise(errc::divergent_variation, "variation tail diverges");
    tail = model.decay()->tail_weighted(theta, lambda);
  }

  QuadSpec quad;
  const double pivot = std::min(lambda, model.alpha0() + 4.0);
  RealMesh mesh = model_segment_mesh(model, pivot, quad,
                                     model.alpha0() - 1.0, 1.0);
  if (lambda > pivot) {
    QuadSpec tq = quad;
    tq.lambda_tail_override = lambda;
    mesh.append(model_tail_mesh(model, pivot, tq, nullptr, nullptr));
  }

  double sum = 0.0;
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    const double mu = mesh.nodes[j];
    sum += mesh.weights[j] * std::pow(1.0 + std::abs(mu), -theta) *
           model.value_norm(mu);
  }
  return sum + tail;
}

double var1_on_contour(const SpectralDensity& model, const Contour& contour) {
  double sum = 0.0;
  for (std::size_t j = 0; j < contour.size(); ++j)
    sum += contour.abs_weights[j] * model.value_norm(contour.nodes[j]) /
           (1.0 + std::abs(contour.nodes[j]));
  return sum + contour.tail_error_bound;
}

AdmissibilityReport admissibility(const SpectralDensity& model,
                                  const Contour& contour) {
  AdmissibilityReport rep;
  rep.sheet = contour.sheet;
  rep.tol_quad = contour.tol_quad;
  rep.tail_error_bound = contour.tail_error_bound;

  const std::vector<double> eigs = hermitian_spectrum(model.tilde_a1());
  rep.tilde_a1_norm = 0.0;
  for (double e : eigs) rep.tilde_a1_norm = std::max(rep.tilde_a1_norm, std::abs(e));

  double d0 = std::numeric_limits<double>::infinity();
  for (const Complex& mu : contour.nodes)
    d0 = std::min(d0, dist_to_reals(mu, eigs));
  if (!(d0 > 1e-14 * (1.0 + rep.tilde_a1_norm)))
    raise(errc::contour_touches_spectrum,
          "contour meets the spectrum of tilde_a1");
  rep.d0 = d0;

  VariationSums sums = variation_sums(model, contour, eigs);
  double max_eig = eigs.empty() ? 0.0 : *std::max_element(eigs.begin(), eigs.end());
  double tilde_tail = 0.0;
  if (contour.tail_error_bound > 0.0 && contour.lambda_tail > max_eig + 1.0)
    tilde_tail = contour.tail_error_bound * (1.0 + contour.lambda_tail) /
                 (contour.lambda_tail - max_eig);
  rep.var1 = sums.var1 + contour.tail_error_bound;
  rep.var_tilde = sums.var_tilde + tilde_tail;

  // measured sensitivity to quadrature refinement
  Contour fine = build_contour(model, contour.sheet, contour.shape,
                               contour.quad.refined());
  VariationSums fs = variation_sums(model, fine, eigs);
  const double d1 = std::abs(fs.var1 + fine.tail_error_bound - rep.var1) /
                    std::max(rep.var1, 1e-300);
  const double d2 = std::abs(fs.var_tilde + tilde_tail - rep.var_tilde) /
                    std::max(rep.var_tilde, 1e-300);
  rep.refinement_delta = std::max(d1, d2);

  const double v = rep.var_tilde;
  const double na = rep.tilde_a1_norm;
  rep.condition1_ok = v < 1.0;
  rep.condition2_ok = v * na < 0.25 * d0 * (1.0 - v) * (1.0 - v);
  rep.omega = d0 * (1.0 - v) * (1.0 - v) - 4.0 * na * v;

  const double radicand = 0.25 * d0 * d0 * (1.0 - v) * (1.0 - v) - d0 * v * na;
  if (radicand < 0.0) {
    rep.condition2_ok = false;
    rep.r_min = 0.0;
  } else {
    rep.r_min = 0.5 * d0 * (1.0 - v) - std::sqrt(radicand);
  }
  const double rad_max = v * d0 * (d0 + na);
  rep.r_max = d0 - std::sqrt(std::max(rad_max, 0.0));
  return rep;
}

double estimate_r0(const SpectralDensity& model,
                   const std::vector<Contour>& family) {
  bool any = false;
  double best = std::numeric_limits<double>::infinity();
  for (const Contour& c : family) {
    AdmissibilityReport rep = admissibility(model, c);
    if (!rep.certified()) continue;
    any = true;
    best = std::min(best, rep.r_min);
  }
  if (!any)
    raise(errc::no_admissible_contour, "no admissible contour in the family");
  return best;
}

}  // namespace specont
