// Experiment driver.  Subcommands:
//   solve <config>          run the configured adaptive algorithm
//   compare <config>...     run several algorithms on one problem
//   sparsity <coeff-file>   best N-term curve and class fits of a vector
//   fit-decay <config>      assemble and fit the decay constants
//
// Exit status: 0 tolerance met / success, 2 max_iter, 3 window saturated,
// 4 configuration error, 5 solver failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dyngal/dyngal.hpp"

namespace {

struct cli_overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
};

void apply_overrides(dyngal::experiment_config& cfg, const cli_overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.format) {
    cfg.write_csv = *o.format == "csv" || *o.format == "both";
    cfg.write_json = *o.format == "json" || *o.format == "both";
  }
}

int thread_cap_from_env() {
  const char* env = std::getenv("DYN_GAL_THREADS");
  if (!env) return 0;
  const int n = std::atoi(env);
  if (n < 1) {
    std::cerr << "DYN_GAL_THREADS must be a positive integer\n";
    return -1;
  }
  return n;
}

int run_solve(const std::string& config_path, const cli_overrides& o,
              bool retry_saturated) {
  dyngal::experiment_config cfg = dyngal::load_config(config_path);
  apply_overrides(cfg, o);
  dyngal::experiment_result res = dyngal::run_experiment(cfg);
  if (res.trace.reason == dyngal::termination_reason::window_saturated &&
      retry_saturated) {
    std::cerr << "window saturated at radius " << cfg.radius_max
              << "; retrying once with radius " << 2 * cfg.radius_max << "\n";
    cfg.radius_max *= 2;
    res = dyngal::run_experiment(cfg);
  }
  const int status = dyngal::write_experiment_outputs(res);
  std::cout << "termination: " << dyngal::to_string(res.trace.reason)
            << "  iterations: " << res.trace.records.size()
            << "  |Lambda|: " << res.trace.final_lambda.size()
            << "  workload: " << res.trace.workload_total << "\n";
  if (status == 3)
    std::cerr << "window saturated; rerun with a larger window.radius_max "
                 "or pass --retry-saturated\n";
  return status;
}

int run_compare(const std::vector<std::string>& config_paths,
                const cli_overrides& o) {
  std::vector<dyngal::experiment_config> cfgs;
  for (const auto& path : config_paths) {
    cfgs.push_back(dyngal::load_config(path));
    apply_overrides(cfgs.back(), o);
  }
  for (std::size_t i = 1; i < cfgs.size(); ++i)
    if (!dyngal::same_problem_block(cfgs[0], cfgs[i]))
      throw dyngal::config_error("compare: config " + config_paths[i] +
                                 " does not share the problem block of " +
                                 config_paths[0]);
  std::vector<dyngal::experiment_result> results;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    results.push_back(dyngal::run_experiment(cfgs[i]));
    const dyngal::json j = dyngal::config_to_json(cfgs[i]);
    std::string label = j.at("algorithm").at("name").get<std::string>();
    if (j.at("algorithm").contains("theta"))
      label += "_theta" +
               dyngal::format_double(j.at("algorithm").at("theta").get<double>());
    labels.push_back(label + "_" + std::to_string(i));
  }
  std::filesystem::create_directories(cfgs[0].out_dir);
  const std::string path = cfgs[0].out_dir + "/compare.csv";
  dyngal::write_file(path, dyngal::compare_to_csv(results, labels));
  std::cout << "wrote " << path << "\n";
  return 0;
}

int run_sparsity(const std::string& coeff_path, const cli_overrides& o) {
  std::ifstream f(coeff_path);
  if (!f) throw dyngal::config_error("cannot open: " + coeff_path);
  dyngal::json j;
  try {
    j = dyngal::json::parse(f);
  } catch (const dyngal::json::parse_error& e) {
    throw dyngal::config_error("parse error in " + coeff_path + ": " +
                               e.what());
  }
  // file layout: {"basis": ..., "d": ..., "kind": "primal"|"dual",
  //               "coefficients": [{index, re, im}...]}
  dyngal::detail::require_keys(j, "coeff-file",
                               {"basis", "d", "kind", "coefficients"},
                               {"basis", "d", "coefficients"});
  const std::string basis_name = j.value("basis", "fourier");
  dyngal::basis_descriptor basis;
  basis.kind = basis_name == "legendre_bs" ? dyngal::basis_kind::legendre_bs
                                           : dyngal::basis_kind::fourier;
  basis.dim = j.value("d", 1);
  const std::string kind = j.value("kind", "primal");

  std::vector<double> errors;
  int dim = basis.dim;
  if (kind == "dual") {
    auto v = dyngal::vector_from_json<dyngal::detail::dual_tag>(
        j.at("coefficients"), basis);
    errors = dyngal::best_n_term(v);
  } else {
    auto v = dyngal::vector_from_json<dyngal::detail::primal_tag>(
        j.at("coefficients"), basis);
    errors = dyngal::best_n_term(v);
  }

  const std::string out_dir = o.out_dir.value_or("out");
  std::filesystem::create_directories(out_dir);
  dyngal::write_file(out_dir + "/en_curve.csv",
                     dyngal::error_curve_to_csv(errors));
  dyngal::json fits;
  fits["gevrey"] = dyngal::fit_report_to_json(dyngal::fit_decay_model(
      errors, dim, dyngal::fit_report::model_t::gevrey));
  fits["algebraic"] = dyngal::fit_report_to_json(dyngal::fit_decay_model(
      errors, dim, dyngal::fit_report::model_t::algebraic));
  dyngal::write_file(out_dir + "/sparsity_fit.json", fits.dump(2) + "\n");
  std::cout << "wrote " << out_dir << "/en_curve.csv and sparsity_fit.json\n";
  return 0;
}

int run_fit_decay(const std::string& config_path, const cli_overrides& o,
                  const std::string& export_matrix) {
  dyngal::experiment_config cfg = dyngal::load_config(config_path);
  apply_overrides(cfg, o);
  dyngal::elliptic_problem p = dyngal::build_problem(cfg);
  const dyngal::window w(cfg.basis, cfg.dim, cfg.radius_max);
  dyngal::stiffness_window s = dyngal::assemble_window(p, w, cfg.bandwidth);

  dyngal::json out;
  out["forward"] = dyngal::decay_to_json(dyngal::fit_decay(s));
  dyngal::index_set probes =
      cfg.decay.probes.empty()
          ? dyngal::default_probe_set(w, cfg.bandwidth)
          : dyngal::index_set(cfg.decay.probes);
  out["inverse"] = dyngal::decay_to_json(dyngal::fit_inverse_decay(s, probes));

  std::filesystem::create_directories(cfg.out_dir);
  dyngal::write_file(cfg.out_dir + "/decay.json", out.dump(2) + "\n");
  if (!export_matrix.empty())
    dyngal::write_file(export_matrix,
                       dyngal::stiffness_to_coordinate_text(s));
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive spectral Galerkin experiment runner"};
  app.require_subcommand(1);

  cli_overrides overrides;
  std::uint64_t seed_value = 0;
  std::string out_dir_value, format_value;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed_value, "override the experiment seed")
        ->each([&](const std::string&) { overrides.seed = seed_value; });
    cmd->add_option("--out-dir", out_dir_value, "override the output dir")
        ->each([&](const std::string&) { overrides.out_dir = out_dir_value; });
    cmd->add_option("--format", format_value, "csv|json|both")
        ->check(CLI::IsMember({"csv", "json", "both"}))
        ->each([&](const std::string&) { overrides.format = format_value; });
  };

  std::string config_path, coeff_path, export_matrix;
  std::vector<std::string> compare_paths;
  bool retry_saturated = false;

  CLI::App* solve = app.add_subcommand("solve", "run one experiment");
  solve->add_option("config", config_path, "config JSON")->required();
  solve->add_flag("--retry-saturated", retry_saturated,
                  "on window saturation, double the radius and retry once");
  add_common(solve);

  CLI::App* compare = app.add_subcommand("compare", "run several configs");
  compare->add_option("configs", compare_paths, "config JSONs")
      ->required()
      ->expected(2, -1);
  add_common(compare);

  CLI::App* sparsity =
      app.add_subcommand("sparsity", "best N-term curve and class fits");
  sparsity->add_option("coeff-file", coeff_path, "coefficient JSON")
      ->required();
  add_common(sparsity);

  CLI::App* fitdecay =
      app.add_subcommand("fit-decay", "fit matrix decay constants");
  fitdecay->add_option("config", config_path, "config JSON")->required();
  fitdecay->add_option("--export-matrix", export_matrix,
                       "write the assembled window in coordinate format");
  add_common(fitdecay);

  CLI11_PARSE(app, argc, argv);

  if (thread_cap_from_env() < 0) return 4;

  try {
    if (solve->parsed()) return run_solve(config_path, overrides, retry_saturated);
    if (compare->parsed()) return run_compare(compare_paths, overrides);
    if (sparsity->parsed()) return run_sparsity(coeff_path, overrides);
    if (fitdecay->parsed())
      return run_fit_decay(config_path, overrides, export_matrix);
  } catch (const dyngal::config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 4;
  } catch (const dyngal::solver_error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
