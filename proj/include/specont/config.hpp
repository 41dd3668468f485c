#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "specont/contour.hpp"
#include "specont/model.hpp"
#include "specont/solver.hpp"
#include "specont/types.hpp"

namespace specont {

struct ContourConfig {
  int sheet = +1;
  ContourShape shape;
  QuadSpec quad;
};

struct VerifySettings {
  int z_sample_count = 20;
  int circle_points = 64;
  double identity_bound = 1e-6;
  double omega_conj_bound = 1e-8;
};

struct SweepSettings {
  double s_max = 1.0;
  int steps = 8;
};

struct ContinueEvalSettings {
  double re_min = 0.0, re_max = 0.0;
  double im_min = 0.0, im_max = 0.0;
  int n_re = 41, n_im = 21;
};

struct RunConfig {
  nlohmann::ordered_json raw;
  std::string config_hash;

  nlohmann::ordered_json model_spec;
  std::vector<ContourConfig> contours;
  SolveOptions solver;
  VerifySettings verify;
  SweepSettings sweep;
  std::optional<ContinueEvalSettings> continue_eval;
  // present when the model spec is of kind "discretized"
  std::optional<double> discretize_lambda;
  std::optional<int> discretize_cells;
  std::string out_dir = ".";
  std::uint64_t seed = 1;

  std::unique_ptr<SpectralDensity> make_model() const;
  Contour make_contour(const SpectralDensity& model, std::size_t i = 0) const;
};

/// Parse a config file.  Any structural or semantic problem throws
/// config_error.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& origin);

std::unique_ptr<SpectralDensity> model_from_json(const nlohmann::ordered_json& spec);

nlohmann::ordered_json admissibility_to_json(const AdmissibilityReport& adm);
nlohmann::ordered_json solve_report_to_json(const SolveReport& rep,
                                            bool include_matrices = true);
nlohmann::ordered_json matrix_to_json(const CMatrix& m);

std::string format_full(double v);  // 17 significant digits

}  // namespace specont
