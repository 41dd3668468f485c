#include "specont/run.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "specont/active.hpp"
#include "specont/factorization.hpp"
#include "specont/oracle.hpp"
#include "specont/rng.hpp"
#include "specont/transfer.hpp"

namespace specont {

namespace {

using json = nlohmann::ordered_json;

json meta_block(const RunConfig& cfg, const Contour* contour) {
  json m;
  m["config_hash"] = cfg.config_hash;
  m["seed"] = cfg.seed;
  if (contour) {
    m["tol_quad"] = contour->tol_quad;
    m["tail_error_bound"] = contour->tail_error_bound;
    m["lambda_tail"] = contour->lambda_tail;
  }
  return m;
}

void write_text(const RunConfig& cfg, const std::string& name,
                const std::string& text) {
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream out(std::filesystem::path(cfg.out_dir) / name,
                    std::ios::binary | std::ios::trunc);
  if (!out) raise(errc::config_error, "cannot write output file " + name);
  out << text;
}

void write_json(const RunConfig& cfg, const std::string& name, const json& j) {
  write_text(cfg, name, j.dump(2) + "\n");
}

std::vector<double> a1_spectrum(const SpectralDensity& model) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(model.tilde_a1());
  return {es.eigenvalues().data(),
          es.eigenvalues().data() + es.eigenvalues().size()};
}

// deterministic samples inside the spectral-equality set, off the contour
std::vector<Complex> sample_equality_set(const SpectralDensity& model,
                                         const Contour& contour,
                                         const AdmissibilityReport& adm,
                                         int count, Rng& rng) {
  std::vector<double> eigs = a1_spectrum(model);
  std::vector<Complex> out;
  const double rho = adm.equality_radius();
  int guard = 0;
  while (static_cast<int>(out.size()) < count && guard < 100000) {
    ++guard;
    const double e = eigs[rng.next_u64() % eigs.size()];
    const double r = rho * (0.05 + 0.9 * std::sqrt(rng.uniform()));
    const double th = rng.uniform(0.0, 6.283185307179586);
    const Complex z = Complex(e, 0.0) + r * Complex(std::cos(th), std::sin(th));
    if (contour.too_close(z)) continue;
    out.push_back(z);
  }
  if (static_cast<int>(out.size()) < count)
    raise(errc::bad_residue_contour, "could not place z samples off the contour");
  return out;
}

struct VerifyArtifacts {
  SolveReport rep_l, rep_ml;
  Contour contour_l, contour_ml;
  IdentityResiduals ids;
  double schur = -1.0;  // only for discretized configs
};

VerifyArtifacts run_verify(const RunConfig& cfg, const SpectralDensity& model) {
  VerifyArtifacts va;
  va.contour_l = cfg.make_contour(model, 0);
  va.contour_ml = va.contour_l.mirrored();
  va.rep_l = solve_basic_equation(model, va.contour_l, cfg.solver);
  va.rep_ml = solve_basic_equation(model, va.contour_ml, cfg.solver);

  Rng rng(cfg.seed);
  std::vector<Complex> zs = sample_equality_set(model, va.contour_l,
                                                va.rep_l.admissibility,
                                                cfg.verify.z_sample_count, rng);
  va.ids.factorization =
      factorization_residual(model, va.contour_l, va.rep_l, zs);
  va.ids.adjoint = adjoint_relation_residual(model, va.contour_l, va.contour_ml,
                                             va.rep_l, va.rep_ml, zs);

  std::vector<SpectralPoint> spec = spectrum_H1(va.rep_l);
  std::vector<Complex> h1_eigs(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) h1_eigs[i] = spec[i].lambda;
  CircleSpec gamma = default_gamma_circle(va.rep_l.admissibility,
                                          a1_spectrum(model), h1_eigs,
                                          cfg.verify.circle_points);
  IdentityResiduals base = omega_identities(model, va.contour_l, va.contour_ml,
                                            va.rep_l, va.rep_ml, gamma);
  va.ids.m_omega = base.m_omega;
  va.ids.h_omega = base.h_omega;
  va.ids.similarity = base.similarity;
  va.ids.omega_conj = base.omega_conj;
  va.ids.omega_norm = base.omega_norm;

  // eigenprojection relations at the best-isolated eigenvalues
  std::vector<std::pair<double, std::size_t>> isolation;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    double iso = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < spec.size(); ++k)
      if (k != i) iso = std::min(iso, std::abs(spec[i].lambda - spec[k].lambda));
    isolation.emplace_back(iso, i);
  }
  std::sort(isolation.rbegin(), isolation.rend());
  int tested = 0;
  for (const auto& [iso, i] : isolation) {
    if (tested >= 3) break;
    if (!(iso > 1e-5)) break;
    CircleSpec small;
    small.center = spec[i].lambda;
    small.radius =
        0.5 * std::min(iso, va.contour_l.clearance(spec[i].lambda));
    small.points = cfg.verify.circle_points;
    if (!(small.radius > 0.0)) continue;
    EigenResidueRecord rec =
        eigenprojection_residues(model, va.contour_l, va.contour_ml, va.rep_l,
                                 va.rep_ml, spec[i].lambda, small);
    va.ids.residue_pp = std::max(
        va.ids.residue_pp, std::max(rec.relation_a, rec.relation_b));
    ++tested;
  }
  return va;
}

}  // namespace

int exit_code_for(errc c) {
  switch (c) {
    case errc::not_admissible:
      return kExitNotAdmissible;
    case errc::no_convergence:
      return kExitSolveFailure;
    case errc::config_error:
      return kExitConfig;
    default:
      return kExitNumeric;
  }
}

int cmd_admissibility(const RunConfig& cfg, std::ostream& log) {
  std::unique_ptr<SpectralDensity> model = cfg.make_model();
  Contour contour = cfg.make_contour(*model, 0);
  AdmissibilityReport adm = admissibility(*model, contour);
  json j;
  j["meta"] = meta_block(cfg, &contour);
  j["report"] = admissibility_to_json(adm);
  write_json(cfg, "admissibility.json", j);
  log << (adm.certified() ? "admissible" : "not admissible")
      << "  var_tilde=" << adm.var_tilde << " d0=" << adm.d0
      << " r_min=" << adm.r_min << "\n";
  return adm.certified() ? kExitOk : kExitNotAdmissible;
}

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  std::unique_ptr<SpectralDensity> model = cfg.make_model();
  Contour contour = cfg.make_contour(*model, 0);
  SolveReport rep = solve_basic_equation(*model, contour, cfg.solver);
  json j;
  j["meta"] = meta_block(cfg, &contour);
  j["solve"] = solve_report_to_json(rep);
  write_json(cfg, "solve_report.json", j);
  log << "converged in " << rep.iterations
      << " iterations, |X| = " << rep.norm_x
      << (rep.certified ? " (certified)" : " (non-certified)") << "\n";
  const bool bounds_ok = rep.certificate_residual <= 10.0 * cfg.solver.tol;
  return bounds_ok ? kExitOk : kExitResidualBound;
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& log) {
  std::unique_ptr<SpectralDensity> model = cfg.make_model();
  Contour contour = cfg.make_contour(*model, 0);
  SolveReport rep = solve_basic_equation(*model, contour, cfg.solver);
  std::vector<SpectralPoint> spec = spectrum_H1(rep);

  std::string csv = "re_lambda,im_lambda,eig_residual,transport_residual,sheet\n";
  bool bounds_ok = true;
  const double transport_bound =
      10.0 * (cfg.solver.tol + contour.tol_quad) *
      (1.0 + rep.admissibility.tilde_a1_norm);
  for (const SpectralPoint& p : spec) {
    const CMatrix m1 = eval_M1_continued(*model, contour, p.lambda).value;
    const double transport = (m1 * p.vec).norm();
    if (transport > transport_bound) bounds_ok = false;
    csv += format_full(p.lambda.real()) + "," + format_full(p.lambda.imag()) +
           "," + format_full(p.eig_residual) + "," + format_full(transport) +
           "," + std::to_string(contour.sheet) + "\n";
  }
  write_text(cfg, "spectrum.csv", csv);
  log << spec.size() << " eigenvalues written\n";
  return bounds_ok ? kExitOk : kExitResidualBound;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  std::unique_ptr<SpectralDensity> model = cfg.make_model();
  VerifyArtifacts va = run_verify(cfg, *model);

  if (cfg.discretize_lambda) {
    DiscretizedFullMatrix dfm = build_discretized_full_matrix(
        *model, *cfg.discretize_lambda, *cfg.discretize_cells);
    Rng rng(cfg.seed + 7);
    std::vector<Complex> zs;
    for (int i = 0; i < cfg.verify.z_sample_count; ++i)
      zs.emplace_back(rng.uniform(model->alpha0(), *cfg.discretize_lambda),
                      rng.uniform(0.5, 2.0) * (i % 2 == 0 ? 1.0 : -1.0));
    va.schur = schur_identity_check(dfm, zs);
  }

  json r;
  r["factorization"] = va.ids.factorization;
  r["m_omega"] = va.ids.m_omega;
  r["h_omega"] = va.ids.h_omega;
  r["residue_pp"] = va.ids.residue_pp;
  r["adjoint"] = va.ids.adjoint;
  r["similarity"] = va.ids.similarity;
  r["omega_conj"] = va.ids.omega_conj;
  r["omega_norm"] = va.ids.omega_norm;
  if (va.schur >= 0.0) r["schur"] = va.schur;

  json j;
  j["meta"] = meta_block(cfg, &va.contour_l);
  j["identity_residuals"] = r;
  const double b = cfg.verify.identity_bound;
  const bool ok = va.ids.factorization <= b && va.ids.m_omega <= b &&
                  va.ids.h_omega <= b && va.ids.residue_pp <= b &&
                  va.ids.adjoint <= b && va.ids.similarity <= b &&
                  va.ids.omega_conj <= cfg.verify.omega_conj_bound &&
                  va.ids.omega_norm < 1.0 &&
                  (va.schur < 0.0 || va.schur <= 1e-10);
  j["all_bounds_hold"] = ok;
  write_json(cfg, "identity_residuals.json", j);
  log << "identity residuals written; bounds "
      << (ok ? "hold" : "VIOLATED") << "\n";
  return ok ? kExitOk : kExitResidualBound;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  std::unique_ptr<SpectralDensity> model = cfg.make_model();
  const ContourConfig& cc = cfg.contours[0];
  std::vector<SweepRow> rows =
      resonance_sweep(*model, cc.shape, cc.quad, cc.sheet, cfg.sweep.s_max,
                      cfg.sweep.steps, cfg.solver);

  std::string csv = "s,branch_id,re_lambda,im_lambda,certified,r_min,in_equality_set\n";
  bool bounds_ok = true;
  for (const SweepRow& r : rows) {
    if (r.solve_failed) {
      csv += format_full(r.s) + ",-1,nan,nan,0,nan,0\n";
      continue;
    }
    if (r.certified && !r.inside_equality_set) bounds_ok = false;
    csv += format_full(r.s) + "," + std::to_string(r.branch) + "," +
           format_full(r.lambda.real()) + "," + format_full(r.lambda.imag()) +
           "," + (r.certified ? "1" : "0") + "," + format_full(r.r_min) + "," +
           (r.inside_equality_set ? "1" : "0") + "\n";
  }
  write_text(cfg, "sweep.csv", csv);
  log << rows.size() << " sweep rows written\n";
  return bounds_ok ? kExitOk : kExitResidualBound;
}

int cmd_continue_eval(const RunConfig& cfg, std::ostream& log) {
  std::unique_ptr<SpectralDensity> model = cfg.make_model();
  Contour contour = cfg.make_contour(*model, 0);
  if (!cfg.continue_eval)
    raise(errc::config_error, "config has no continue_eval section");
  const ContinueEvalSettings& ce = *cfg.continue_eval;

  std::string csv = "re_z,im_z,abs_det,sigma_min,sheet\n";
  for (int iy = 0; iy < ce.n_im; ++iy) {
    for (int ix = 0; ix < ce.n_re; ++ix) {
      const double re =
          ce.re_min + (ce.re_max - ce.re_min) * ix / std::max(ce.n_re - 1, 1);
      const double im =
          ce.im_min + (ce.im_max - ce.im_min) * iy / std::max(ce.n_im - 1, 1);
      const Complex z(re, im);
      std::string abs_det = "nan", sigma_min = "nan";
      try {
        const CMatrix m1 = eval_M1_continued(*model, contour, z).value;
        Eigen::BDCSVD<CMatrix> svd(m1);
        abs_det = format_full(std::exp(
            svd.singularValues().array().log().sum()));
        sigma_min = format_full(svd.singularValues()(m1.rows() - 1));
      } catch (const numeric_error&) {
        // points inside the contour margin stay unevaluated
      }
      csv += format_full(re) + "," + format_full(im) + "," + abs_det + "," +
             sigma_min + "," + std::to_string(contour.sheet) + "\n";
    }
  }
  write_text(cfg, "continue_eval.csv", csv);
  log << (ce.n_re * ce.n_im) << " grid points written\n";
  return kExitOk;
}

}  // namespace specont
