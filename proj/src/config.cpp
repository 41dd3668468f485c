#include "specont/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace specont {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void config_fail(const std::string& msg) {
  raise(errc::config_error, msg);
}

double get_num(const json& j, const std::string& key, double fallback,
               bool required = false) {
  if (!j.contains(key)) {
    if (required) config_fail("missing field '" + key + "'");
    return fallback;
  }
  if (!j[key].is_number()) config_fail("field '" + key + "' must be a number");
  return j[key].get<double>();
}

int get_int(const json& j, const std::string& key, int fallback,
            bool required = false) {
  if (!j.contains(key)) {
    if (required) config_fail("missing field '" + key + "'");
    return fallback;
  }
  if (!j[key].is_number_integer()) config_fail("field '" + key + "' must be an integer");
  return j[key].get<int>();
}

Complex parse_scalar(const json& v) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Complex(v[0].get<double>(), v[1].get<double>());
  config_fail("matrix entries must be numbers or [re, im] pairs");
}

CMatrix parse_matrix(const json& j) {
  if (j.is_object() && j.contains("diag")) {
    const json& d = j["diag"];
    if (!d.is_array()) config_fail("'diag' must be an array");
    CMatrix m = CMatrix::Zero(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = parse_scalar(d[i]);
    return m;
  }
  const json& rows = j.is_object() && j.contains("dense") ? j["dense"] : j;
  if (!rows.is_array() || rows.empty()) config_fail("expected a matrix");
  const std::size_t n = rows.size();
  const std::size_t c = rows[0].is_array() ? rows[0].size() : 0;
  if (c == 0) config_fail("matrix rows must be arrays");
  CMatrix m(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array() || rows[i].size() != c)
      config_fail("ragged matrix rows");
    for (std::size_t k = 0; k < c; ++k) m(i, k) = parse_scalar(rows[i][k]);
  }
  return m;
}

ScalarProfile parse_profile(const json& j, bool spatial, double default_center) {
  ScalarProfile p;
  if (j.is_null()) return p;
  if (!j.is_object()) config_fail("profile must be an object");
  const std::string preset = j.value("preset", std::string("zero"));
  p.amplitude = get_num(j, "amplitude", j.contains("value") ? get_num(j, "value", 0.0) : 0.0);
  p.rate = get_num(j, "rate", 1.0);
  p.center = get_num(j, "center", spatial ? 0.0 : default_center);
  p.sigma = get_num(j, "sigma", 1.0);
  p.width = get_num(j, "width", 1.0);
  p.cutoff = get_num(j, "cutoff", 0.0);
  if (preset == "zero")
    p.kind = ScalarProfile::Kind::zero;
  else if (preset == "const")
    p.kind = ScalarProfile::Kind::constant;
  else if (preset == "gaussian")
    p.kind = ScalarProfile::Kind::gaussian;
  else if (preset == "exp-decay")
    p.kind = spatial ? ScalarProfile::Kind::exp_abs : ScalarProfile::Kind::exp_decay;
  else if (preset == "bump")
    p.kind = spatial ? ScalarProfile::Kind::bump : ScalarProfile::Kind::linexp;
  else
    config_fail("unknown profile preset '" + preset + "'");
  return p;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::unique_ptr<SpectralDensity> model_from_json(const json& spec) {
  if (!spec.is_object()) config_fail("model spec must be an object");
  const std::string kind = spec.value("kind", std::string());
  if (kind == "separable") {
    const double alpha0 = get_num(spec, "alpha0", 0.0, true);
    if (!spec.contains("tilde_a1")) config_fail("separable model needs tilde_a1");
    CMatrix a1t = parse_matrix(spec["tilde_a1"]);
    ScalarProfile phi = parse_profile(spec.contains("phi") ? spec["phi"] : json(),
                                      /*spatial=*/false, alpha0);
    CMatrix g;
    if (spec.contains("coupling")) {
      const json& c = spec["coupling"];
      g = parse_matrix(c.is_object() && c.contains("entries") ? c["entries"] : c);
    } else {
      g = CMatrix::Identity(a1t.rows(), a1t.rows());
    }
    HolDomain dom;
    if (spec.contains("holomorphy")) {
      const json& h = spec["holomorphy"];
      const std::string type = h.value("type", std::string("strip"));
      if (type == "strip") {
        dom.kind = HolDomain::Kind::strip;
        dom.height = get_num(h, "height", 2.0);
        dom.margin = get_num(h, "margin", 0.5);
      } else if (type == "parabola") {
        dom.kind = HolDomain::Kind::parabola;
        dom.alpha = get_num(h, "alpha", 1.0);
      } else {
        config_fail("unknown holomorphy type");
      }
    } else {
      dom.kind = HolDomain::Kind::strip;
      dom.height = 2.0;
      dom.margin = 0.5;
    }
    try {
      return std::make_unique<SeparableModel>(alpha0, std::move(a1t), phi,
                                              std::move(g), dom);
    } catch (const numeric_error& e) {
      config_fail(e.what());
    }
  }
  if (kind == "schroedinger") {
    const double lambda0 = get_num(spec, "lambda0", 0.0, true);
    const double half_width = get_num(spec, "half_width", 10.0);
    const int n_points = get_int(spec, "n_points", 256);
    ScalarProfile b = parse_profile(spec.contains("b") ? spec["b"] : json(),
                                    /*spatial=*/true, 0.0);
    ScalarProfile a1 = parse_profile(spec.contains("a1") ? spec["a1"] : json(),
                                     /*spatial=*/true, 0.0);
    const double alpha = get_num(spec, "decay_alpha", 1.0);
    double c_default = 0.0;
    for (double x = -half_width; x <= half_width; x += 0.01)
      c_default = std::max(c_default, std::abs(b.real_at(x)) * std::exp(alpha * std::abs(x)));
    const double c = get_num(spec, "decay_c", 1.0001 * c_default + 1e-300);
    try {
      return std::make_unique<SchroedingerModel>(lambda0, half_width, n_points,
                                                 b, a1, alpha, c);
    } catch (const numeric_error& e) {
      config_fail(e.what());
    }
  }
  if (kind == "discretized") {
    if (!spec.contains("base")) config_fail("discretized model needs 'base'");
    return model_from_json(spec["base"]);
  }
  config_fail("unknown model kind '" + kind + "'");
}

std::unique_ptr<SpectralDensity> RunConfig::make_model() const {
  return model_from_json(model_spec);
}

Contour RunConfig::make_contour(const SpectralDensity& model, std::size_t i) const {
  if (i >= contours.size()) config_fail("contour index out of range");
  const ContourConfig& cc = contours[i];
  return build_contour(model, cc.sheet, cc.shape, cc.quad);
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    config_fail(origin + ": " + e.what());
  }
  RunConfig cfg;
  cfg.raw = j;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a(text)));
  cfg.config_hash = hash;

  if (!j.contains("model")) config_fail("config needs a 'model' section");
  cfg.model_spec = j["model"];
  if (cfg.model_spec.value("kind", std::string()) == "discretized") {
    cfg.discretize_lambda = get_num(cfg.model_spec, "lambda", 0.0, true);
    cfg.discretize_cells = get_int(cfg.model_spec, "cells", 0, true);
  }

  if (j.contains("contours")) {
    if (!j["contours"].is_array()) config_fail("'contours' must be an array");
    for (const json& c : j["contours"]) {
      ContourConfig cc;
      cc.sheet = get_int(c, "sheet", 1);
      cc.shape.height = get_num(c, "height", cc.shape.height);
      cc.shape.re_entry = get_num(c, "re_entry", cc.shape.re_entry);
      cc.quad.points_per_segment =
          get_int(c, "points_per_segment", cc.quad.points_per_segment);
      cc.quad.tail_points = get_int(c, "tail_points", cc.quad.tail_points);
      cc.quad.arc_cells = get_int(c, "arc_cells", cc.quad.arc_cells);
      cc.quad.segment_cells = get_int(c, "segment_cells", cc.quad.segment_cells);
      cc.quad.tail_cells = get_int(c, "tail_cells", cc.quad.tail_cells);
      if (c.contains("lambda_tail"))
        cc.quad.lambda_tail_override = get_num(c, "lambda_tail", 0.0);
      cfg.contours.push_back(cc);
    }
  }
  if (cfg.contours.empty()) cfg.contours.push_back(ContourConfig{});

  if (j.contains("solver")) {
    const json& s = j["solver"];
    cfg.solver.tol = get_num(s, "tol", 1e-10);
    cfg.solver.max_iter = get_int(s, "max_iter", 200);
    cfg.solver.allow_noncertified = s.value("allow_noncertified", false);
  }
  if (j.contains("verify")) {
    const json& s = j["verify"];
    cfg.verify.z_sample_count = get_int(s, "z_sample_count", 20);
    cfg.verify.circle_points = get_int(s, "circle_points", 64);
    cfg.verify.identity_bound = get_num(s, "identity_bound", 1e-6);
    cfg.verify.omega_conj_bound = get_num(s, "omega_conj_bound", 1e-8);
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    cfg.sweep.s_max = get_num(s, "s_max", 1.0);
    cfg.sweep.steps = get_int(s, "steps", 8);
    if (cfg.sweep.steps < 1) config_fail("sweep steps must be >= 1");
  }
  if (j.contains("continue_eval")) {
    const json& s = j["continue_eval"];
    ContinueEvalSettings ce;
    ce.re_min = get_num(s, "re_min", 0.0, true);
    ce.re_max = get_num(s, "re_max", 0.0, true);
    ce.im_min = get_num(s, "im_min", 0.0, true);
    ce.im_max = get_num(s, "im_max", 0.0, true);
    ce.n_re = get_int(s, "n_re", 41);
    ce.n_im = get_int(s, "n_im", 21);
    cfg.continue_eval = ce;
  }
  if (j.contains("output") && j["output"].contains("dir"))
    cfg.out_dir = j["output"]["dir"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();

  if (!(cfg.solver.tol > 0.0)) config_fail("solver tol must be positive");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_fail("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k)
      row.push_back(json::array({m(i, k).real(), m(i, k).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

json admissibility_to_json(const AdmissibilityReport& adm) {
  json j;
  j["sheet"] = adm.sheet;
  j["var1"] = adm.var1;
  j["var_tilde"] = adm.var_tilde;
  j["d0"] = adm.d0;
  j["omega"] = adm.omega;
  j["r_min"] = adm.r_min;
  j["r_max"] = adm.r_max;
  j["condition1_ok"] = adm.condition1_ok;
  j["condition2_ok"] = adm.condition2_ok;
  j["certified"] = adm.certified();
  j["tilde_a1_norm"] = adm.tilde_a1_norm;
  j["equality_radius"] = adm.equality_radius();
  j["tol_quad"] = adm.tol_quad;
  j["refinement_delta"] = adm.refinement_delta;
  j["tail_error_bound"] = adm.tail_error_bound;
  return j;
}

json solve_report_to_json(const SolveReport& rep, bool include_matrices) {
  json j;
  j["sheet"] = rep.sheet;
  j["iterations"] = rep.iterations;
  j["final_residual"] = rep.final_residual;
  j["contraction_estimate"] = rep.contraction_estimate;
  j["norm_x"] = rep.norm_x;
  j["max_iterate_norm"] = rep.max_iterate_norm;
  j["certified"] = rep.certified;
  j["certificate_residual"] = rep.certificate_residual;
  j["residual_history"] = rep.residual_history;
  j["admissibility"] = admissibility_to_json(rep.admissibility);
  if (include_matrices) {
    j["x"] = matrix_to_json(rep.x);
    j["h1"] = matrix_to_json(rep.h1);
  }
  return j;
}

}  // namespace specont
