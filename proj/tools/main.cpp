#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "specont/run.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config_path, "path to the run config (JSON)")
      ->required();
  cmd->add_option("--out-dir", args.out_dir, "output directory override");
  cmd->add_option("--seed", args.seed, "rng seed override")
      ->each([&](const std::string&) { args.seed_set = true; });
}

int dispatch(const CommonArgs& args,
             int (*fn)(const specont::RunConfig&, std::ostream&),
             const char* name,
             const std::function<void(specont::RunConfig&)>& tweak = {}) {
  try {
    specont::RunConfig cfg = specont::load_config(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed_set) cfg.seed = args.seed;
    if (tweak) tweak(cfg);
    return fn(cfg, std::cout);
  } catch (const specont::numeric_error& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return specont::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return specont::kExitNumeric;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "specont: analytic continuation of 2x2 block-operator transfer "
      "functions, resonance solves and identity verification"};
  app.require_subcommand(1);

  CommonArgs a_adm, a_solve, a_spec, a_verify, a_sweep, a_cont;
  int sheet = 0;
  double tol = 0.0;
  int max_iter = 0;
  bool allow_noncert = false;
  double s_max = -1.0;
  int steps = 0;

  CLI::App* c_adm = app.add_subcommand("admissibility",
                                       "contour admissibility constants");
  add_common(c_adm, a_adm);

  CLI::App* c_solve = app.add_subcommand("solve", "fixed-point solve of the basic equation");
  add_common(c_solve, a_solve);
  c_solve->add_option("--sheet", sheet, "sheet index (+1 or -1)");
  c_solve->add_option("--tol", tol, "successive-difference tolerance");
  c_solve->add_option("--max-iter", max_iter, "iteration cap");
  c_solve->add_flag("--allow-noncertified", allow_noncert,
                    "proceed when the admissibility conditions fail");

  CLI::App* c_spec = app.add_subcommand("spectrum", "eigenvalues of H1 with residuals");
  add_common(c_spec, a_spec);
  c_spec->add_option("--sheet", sheet, "sheet index (+1 or -1)");

  CLI::App* c_verify = app.add_subcommand("verify", "full identity suite");
  add_common(c_verify, a_verify);

  CLI::App* c_sweep = app.add_subcommand("sweep", "coupling-constant sweep");
  add_common(c_sweep, a_sweep);
  c_sweep->add_option("--s-max", s_max, "largest coupling scale");
  c_sweep->add_option("--steps", steps, "number of sweep steps");
  c_sweep->add_option("--sheet", sheet, "sheet index (+1 or -1)");

  CLI::App* c_cont = app.add_subcommand("continue-eval",
                                        "tabulate det/sigma_min of M1(z, Gamma) on a grid");
  add_common(c_cont, a_cont);
  c_cont->add_option("--sheet", sheet, "sheet index (+1 or -1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : specont::kExitConfig;
  }

  auto solver_tweak = [&](specont::RunConfig& cfg) {
    if (sheet == 1 || sheet == -1)
      for (auto& cc : cfg.contours) cc.sheet = sheet;
    if (tol > 0.0) cfg.solver.tol = tol;
    if (max_iter > 0) cfg.solver.max_iter = max_iter;
    if (allow_noncert) cfg.solver.allow_noncertified = true;
    if (s_max > 0.0) cfg.sweep.s_max = s_max;
    if (steps > 0) cfg.sweep.steps = steps;
  };

  if (c_adm->parsed()) return dispatch(a_adm, specont::cmd_admissibility, "admissibility");
  if (c_solve->parsed()) return dispatch(a_solve, specont::cmd_solve, "solve", solver_tweak);
  if (c_spec->parsed()) return dispatch(a_spec, specont::cmd_spectrum, "spectrum", solver_tweak);
  if (c_verify->parsed()) return dispatch(a_verify, specont::cmd_verify, "verify");
  if (c_sweep->parsed()) return dispatch(a_sweep, specont::cmd_sweep, "sweep", solver_tweak);
  if (c_cont->parsed()) return dispatch(a_cont, specont::cmd_continue_eval, "continue-eval", solver_tweak);
  return specont::kExitConfig;
}
