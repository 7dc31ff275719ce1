// Command-line front end: query planning, experiment execution, invariant
// suites, report tables, and instance generation.
//
// Exit codes: 0 on success, 1 when a verification suite fails, 2 on
// configuration or usage errors, 3 on runtime errors.

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "symplearn/harness.hpp"

using namespace symplearn;

namespace {

int cmd_plan(int m, double z, double n_bar, double n_bar_in, double epsilon, double delta,
             const std::string& symplectic, const std::string& displacement,
             const std::string& out_path) {
  const QueryPlan plan =
      plan_queries(m, z, n_bar, n_bar_in, epsilon, delta, parse_symplectic_variant(symplectic),
                   parse_displacement_variant(displacement));
  const Json j = plan_to_json(plan);
  if (!out_path.empty()) save_json_file(out_path, j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, int trials_override,
            std::uint64_t seed_override, bool seed_given, int threads,
            const std::string& out_dir, const std::string& accounting,
            const std::string& sampler) {
  ExperimentConfig config = config_from_json(load_json_file(config_path));
  if (trials_override > 0) config.trials = trials_override;
  if (seed_given) config.master_seed = seed_override;
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (!accounting.empty()) config.accounting = parse_accounting(accounting);
  if (!sampler.empty()) config.sampler = parse_sampler_mode(sampler);

  const ExperimentResult result = run_experiment(config, threads);
  std::cout << summary_to_json(result.summary).dump(2) << "\n";
  if (!config.out_dir.empty())
    std::cerr << "wrote " << result.records.size() << " trial records to " << config.out_dir
              << "\n";
  return 0;
}

int cmd_verify(std::vector<std::string> suites, std::uint64_t seed,
               const std::string& json_path) {
  const std::vector<std::string> known = verify_suite_names();
  for (const std::string& name : suites)
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw ConfigError("verify: unknown suite \"" + name + "\"");
  if (suites.empty()) suites = known;
  Json all = Json::array();
  bool ok = true;
  for (const std::string& name : suites) {
    const SuiteReport report = verify_suite(name, seed);
    all.push_back(suite_report_to_json(report));
    ok = ok && report.passed;
    std::cout << (report.passed ? "PASS " : "FAIL ") << name << "\n";
    for (const SuiteCheck& check : report.checks)
      std::cout << "  " << (check.pass ? "ok   " : "FAIL ") << check.name << ": " << check.measured
                << " (threshold " << check.threshold << ")\n";
  }
  if (!json_path.empty()) save_json_file(json_path, all);
  return ok ? 0 : 1;
}

int cmd_tables(const std::string& dir, const std::string& format) {
  for (const std::string& path : emit_tables(dir, format)) std::cout << path << "\n";
  return 0;
}

int cmd_gen_instance(int m, double z, std::uint64_t seed, const std::string& r_path,
                     const std::string& s_path) {
  write_random_instance(m, z, seed, r_path, s_path);
  std::cout << r_path << "\n" << s_path << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-space simulator and tomography engine for Gaussian unitaries"};
  app.require_subcommand(1);

  // --- plan -----------------------------------------------------------------
  CLI::App* plan = app.add_subcommand("plan", "Compute a query plan and print it as JSON");
  int plan_m = 1;
  double plan_z = 2.0, plan_n_bar = 1.0, plan_n_bar_in = 1e6, plan_eps = 0.5, plan_delta = 0.1;
  std::string plan_sym = "vacuum_shared", plan_disp = "tmsv", plan_out;
  plan->add_option("--m", plan_m, "number of modes")->required();
  plan->add_option("--z", plan_z, "operator-norm bound on the symplectic part")->required();
  plan->add_option("--n-bar", plan_n_bar, "test energy per mode")->required();
  plan->add_option("--n-bar-in", plan_n_bar_in, "input photon budget per query")->required();
  plan->add_option("--epsilon", plan_eps, "target diamond-distance accuracy")->required();
  plan->add_option("--delta", plan_delta, "failure probability")->required();
  plan->add_option("--symplectic", plan_sym, "symplectic variant: vacuum_shared|symmetric");
  plan->add_option("--displacement", plan_disp, "displacement variant: tmsv|single_mode");
  plan->add_option("--out", plan_out, "also write the plan JSON to this file");

  // --- run --------------------------------------------------------------------
  CLI::App* run = app.add_subcommand("run", "Run a batch experiment from a config file");
  std::string run_config, run_out, run_accounting, run_sampler;
  int run_trials = 0, run_threads = 1;
  std::uint64_t run_seed = 0;
  run->add_option("--config", run_config, "experiment config JSON")->required();
  run->add_option("--trials", run_trials, "override the trial count");
  CLI::Option* seed_opt = run->add_option("--seed", run_seed, "override the master seed");
  run->add_option("--threads", run_threads,
                  "worker threads (summaries are thread-count invariant)");
  run->add_option("--out", run_out, "override the output directory");
  run->add_option("--accounting", run_accounting, "override accounting: paper|strict");
  run->add_option("--sampler", run_sampler, "override sampler: per_shot|aggregated|exact_mean");

  // --- verify -----------------------------------------------------------------
  CLI::App* verify = app.add_subcommand("verify", "Run the numerical invariant suites");
  std::vector<std::string> verify_suites;
  std::uint64_t verify_seed = 1;
  std::string verify_json;
  verify->add_option("--suite", verify_suites,
                     "suite name (repeatable; default: all of moments, regularize, passive, "
                     "concentration)");
  verify->add_option("--seed", verify_seed, "suite seed");
  verify->add_option("--json", verify_json, "write the reports as JSON to this file");

  // --- tables -------------------------------------------------------------------
  CLI::App* tables = app.add_subcommand("tables", "Flatten a report directory into tables");
  std::string tables_dir, tables_format = "csv";
  tables->add_option("--dir", tables_dir, "report directory written by `run`")->required();
  tables->add_option("--format", tables_format, "csv|json");

  // --- gen-instance ---------------------------------------------------------------
  CLI::App* gen = app.add_subcommand("gen-instance", "Draw a random hidden unitary to files");
  int gen_m = 1;
  double gen_z = 2.0;
  std::uint64_t gen_seed = 1;
  std::string gen_r, gen_s;
  gen->add_option("--m", gen_m, "number of modes")->required();
  gen->add_option("--z", gen_z, "operator-norm cap for the symplectic part")->required();
  gen->add_option("--seed", gen_seed, "instance seed");
  gen->add_option("--r-file", gen_r, "output path for the displacement JSON")->required();
  gen->add_option("--s-file", gen_s, "output path for the symplectic JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*plan)
      return cmd_plan(plan_m, plan_z, plan_n_bar, plan_n_bar_in, plan_eps, plan_delta, plan_sym,
                      plan_disp, plan_out);
    if (*run)
      return cmd_run(run_config, run_trials, run_seed, seed_opt->count() > 0, run_threads,
                     run_out, run_accounting, run_sampler);
    if (*verify) return cmd_verify(verify_suites, verify_seed, verify_json);
    if (*tables) return cmd_tables(tables_dir, tables_format);
    if (*gen) return cmd_gen_instance(gen_m, gen_z, gen_seed, gen_r, gen_s);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const StructureError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
