// switchadj command-line interface: simulate, truth, adjust, study.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "switchadj/adjusters.hpp"
#include "switchadj/config.hpp"
#include "switchadj/dataset_io.hpp"
#include "switchadj/errors.hpp"
#include "switchadj/inference.hpp"
#include "switchadj/study_runner.hpp"
#include "switchadj/trial_sim.hpp"

namespace fs = std::filesystem;
using namespace switchadj;

namespace {

enum exit_code : int { ok = 0, usage = 2, non_convergence = 3, io_failure = 4 };

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw io_error(fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  if (!out) throw io_error(fmt::format("write to '{}' failed", path.string()));
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

struct simulate_args {
  int scenario = 1;
  std::string condition = "A";
  std::uint64_t seed = 1;
  std::string out;
  std::string config;
  bool omit_oracle = false;
};

int run_simulate(const simulate_args& a) {
  scenario_spec spec = a.config.empty() ? scenario_preset(a.scenario)
                                        : scenario_from_document(read_key_value_file(a.config), scenario_preset(a.scenario));
  spec.cond = parse_condition(a.condition);
  spec.validate();
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw io_error(fmt::format("cannot create output directory '{}': {}", a.out, ec.message()));
  write_dataset_csv(fs::path(a.out) / "rct.csv", simulate_rct(spec, a.seed), a.omit_oracle);
  write_dataset_csv(fs::path(a.out) / "external.csv", simulate_external(spec, a.seed), a.omit_oracle);
  return ok;
}

struct truth_args {
  std::string config;
  double t_star = 0.0;
};

int run_truth(const truth_args& a) {
  const scenario_spec spec = scenario_from_document(read_key_value_file(a.config));
  fmt::print("{:.6f}\n", true_control_rmst(spec, a.t_star));
  return ok;
}

struct adjust_args {
  std::string method;
  std::string rct;
  std::string external;
  double c = 4.0;
  std::string recensor = "switchers-only";
  std::string rmst = "hybrid";
  double t_star = 0.0;
  int bootstrap = 0;
  double level = 0.95;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string covariates = "badprog";
  std::string adjusted_out = "adjusted.csv";
  std::string json_out;
  bool relative_effect = false;
};

int run_adjust(const adjust_args& a) {
  method_spec method{parse_method_kind(a.method), a.c};
  analysis_options options;
  options.covariates = split_list(a.covariates);
  options.recensor = parse_recensor_mode(a.recensor);
  options.rmst.mode = parse_rmst_mode(a.rmst);
  options.t_star = a.t_star;
  options.relative_effect = a.relative_effect;

  const trial_dataset rct = read_dataset_csv(fs::path(a.rct));
  trial_dataset external;
  external.source = source_kind::external;
  if (!a.external.empty()) {
    external = read_dataset_csv(fs::path(a.external));
  } else if (method.kind == method_kind::eca) {
    throw config_error("--external is required for eca");
  }

  const adjustment_result r = run_method(method, rct, external, options);

  nlohmann::json diag = {
      {"method", to_string(r.method)},
      {"mu_hat", optional_number(r.mu_hat)},
      {"mu_se", optional_number(r.mu_se)},
      {"rho_hat", optional_number(r.rho_hat)},
      {"rho_se", optional_number(r.rho_se)},
      {"external_weight", optional_number(r.external_weight)},
      {"decay", optional_number(r.decay)},
      {"external_events", r.external_events},
      {"effective_external_events", optional_number(r.effective_external_events)},
      {"recensor", to_string(r.recensor)},
      {"rmst_mode", to_string(options.rmst.mode)},
      {"t_star", options.t_star},
      {"control_rmst", r.control_rmst},
      {"degenerate", r.degenerate},
  };
  if (r.effect) {
    diag["relative_effect"] = {{"acceleration_factor", r.effect->acceleration_factor},
                               {"log_af_se", r.effect->log_af_se},
                               {"rmst_experimental", r.effect->rmst_experimental},
                               {"rmst_control", r.effect->rmst_control},
                               {"drmst", r.effect->drmst}};
  }
  if (a.bootstrap > 0) {
    bootstrap_spec spec;
    spec.replicates = a.bootstrap;
    spec.level = a.level;
    spec.seed = a.seed;
    spec.threads = a.threads;
    const bootstrap_result b = bootstrap_ci(rct, external, method, options, spec);
    diag["bootstrap"] = {{"point", b.point}, {"lower", b.lower},       {"upper", b.upper},
                         {"level", b.level}, {"B", b.replicates},      {"failures", b.failures}};
  }

  std::string csv = "id,arm,time,status,weight\n";
  for (const auto& row : r.rows) {
    csv += fmt::format("{},{},{},{},{}\n", row.id, row.arm, row.time, row.status, row.weight);
  }
  write_text(a.adjusted_out, csv);

  const std::string text = diag.dump(2) + "\n";
  if (a.json_out.empty()) {
    std::cout << text;
  } else {
    write_text(a.json_out, text);
  }
  return ok;
}

struct study_args {
  std::string config;
  std::optional<int> reps;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
  std::optional<std::string> out;
};

int run_study_command(const study_args& a) {
  study_config config = a.config.empty() ? study_config{} : study_config_from_document(read_key_value_file(a.config));
  if (a.reps) config.replications = *a.reps;
  if (a.threads) config.threads = *a.threads;
  if (a.seed) config.seed = *a.seed;
  if (a.format) config.format = *a.format;
  if (a.out) config.out = *a.out;
  config.validate();

  const study_result result = run_study(config);
  const std::string table = format_metrics(result, config.format);
  if (config.out.empty()) {
    std::cout << table;
    return ok;
  }
  const fs::path out(config.out);
  write_text(out, table);
  write_text(out.parent_path() / (out.stem().string() + "_raw.csv"), format_raw_csv(result));
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Treatment-switching adjustment (TSE / ATSE) and trial simulation"};
  app.require_subcommand(1);

  simulate_args sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate one RCT and one external dataset");
  simulate->add_option("--scenario", sim.scenario, "Scenario preset 1-8")->required()->check(CLI::Range(1, 8));
  simulate->add_option("--condition", sim.condition, "Condition A, B or C")->required();
  simulate->add_option("--seed", sim.seed, "Base seed")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--config", sim.config, "Scenario overrides (key = value file)");
  simulate->add_flag("--omit-oracle-cols", sim.omit_oracle, "Drop u and os_noswitch columns");

  truth_args truth;
  auto* truth_cmd = app.add_subcommand("truth", "Quadrature control-arm RMST truth");
  truth_cmd->add_option("--config", truth.config, "Scenario config file")->required();
  truth_cmd->add_option("--tstar", truth.t_star, "Restriction time in days")->required();

  adjust_args adj;
  auto* adjust = app.add_subcommand("adjust", "Run one analysis method on dataset CSVs");
  adjust->add_option("--method", adj.method, "itt|oracle|tse|atse|eca")->required();
  adjust->add_option("--rct", adj.rct, "RCT dataset CSV")->required();
  adjust->add_option("--external", adj.external, "External dataset CSV");
  adjust->add_option("--c", adj.c, "ATSE decay factor")->capture_default_str();
  adjust->add_option("--recensor", adj.recensor, "off|switchers-only|all-control")->capture_default_str();
  adjust->add_option("--rmst", adj.rmst, "km|weibull|hybrid")->capture_default_str();
  adjust->add_option("--tstar", adj.t_star, "Restriction time in days")->required();
  adjust->add_option("--bootstrap", adj.bootstrap, "Bootstrap replicates (0 = none)");
  adjust->add_option("--level", adj.level, "Confidence level")->capture_default_str();
  adjust->add_option("--seed", adj.seed, "Bootstrap seed")->required();
  adjust->add_option("--threads", adj.threads, "Bootstrap threads")->capture_default_str();
  adjust->add_option("--covariates", adj.covariates, "Comma-separated covariates")->capture_default_str();
  adjust->add_option("--adjusted-out", adj.adjusted_out, "Adjusted dataset CSV path")->capture_default_str();
  adjust->add_option("--json-out", adj.json_out, "Diagnostics JSON path (default stdout)");
  adjust->add_flag("--relative-effect", adj.relative_effect, "Also report AF and dRMST");

  study_args st;
  auto* study = app.add_subcommand("study", "Run the simulation study and report metrics");
  study->add_option("--config", st.config, "Study config file");
  study->add_option("--reps", st.reps, "Replications per cell");
  study->add_option("--threads", st.threads, "Worker threads");
  study->add_option("--seed", st.seed, "Base seed");
  study->add_option("--format", st.format, "csv|json|md");
  study->add_option("--out", st.out, "Metrics output path (raw estimates go to <stem>_raw.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*truth_cmd) return run_truth(truth);
    if (*adjust) return run_adjust(adj);
    if (*study) return run_study_command(st);
  } catch (const config_error& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return usage;
  } catch (const io_error& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return io_failure;
  } catch (const fit_error& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return non_convergence;
  } catch (const bootstrap_error& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return non_convergence;
  } catch (const extrapolation_required_error& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return non_convergence;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 1;
  }
  return usage;
}
