#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "switchadj/adjusters.hpp"
#include "switchadj/config.hpp"
#include "switchadj/trial_sim.hpp"

namespace switchadj {

/// Oracle, ITT, TSE, ECA, ATSE c = 1, 4, 8.
std::vector<method_spec> default_methods();

struct study_config {
  std::vector<int> scenarios = {1};
  std::vector<condition> conditions = {condition::A, condition::B, condition::C};
  std::vector<method_spec> methods = default_methods();
  int replications = 200;
  std::uint64_t seed = 1;
  int threads = 1;
  rmst_policy rmst;
  recensor_mode recensor = recensor_mode::switchers_only;
  std::vector<std::string> covariates = {"badprog"};
  std::string format = "md";
  std::string out;
  /// ScenarioSpec fields applied on top of every scenario preset.
  std::vector<std::pair<std::string, std::string>> scenario_overrides;

  void validate() const;
};

/// Unknown keys are rejected; scenario field names are taken as overrides.
study_config study_config_from_document(const key_value_document& doc);

/// Preset for `scenario` with the condition and overrides applied.
scenario_spec study_scenario(const study_config& config, int scenario, condition cond);

std::uint64_t replication_seed(std::uint64_t base, int scenario, condition cond, int replication);

struct replication_output {
  std::vector<std::optional<double>> estimates;  // per method; empty on failure
};

/// One RCT and one external dataset from `seed`, every method applied to them.
/// t* is the scenario end date.
replication_output run_replication(const scenario_spec& spec, const std::vector<method_spec>& methods,
                                   std::uint64_t seed, const analysis_options& options);

struct performance {
  double bias_pct = 0.0;
  double se_pct = 0.0;
  double rmse_pct = 0.0;
};

/// bias% = 100 (mean - truth) / truth; se% uses the R - 1 divisor;
/// rmse% = 100 sqrt(mean (est - truth)^2) / truth.
performance performance_metrics(std::span<const double> estimates, double truth);

struct metrics_cell {
  int scenario = 1;
  condition cond = condition::A;
  method_spec method;
  performance perf;
  int failures = 0;
  int replications = 0;
  double truth = 0.0;
};

struct raw_estimate {
  int scenario = 1;
  condition cond = condition::A;
  int replication = 0;
  std::string method;
  std::optional<double> estimate;
};

struct study_result {
  std::vector<metrics_cell> cells;
  std::vector<raw_estimate> raw;
};

study_result run_study(const study_config& config);

/// Tables in the layout rows = method, columns = condition x metric.
std::string format_metrics(const study_result& result, const std::string& format);
std::string format_raw_csv(const study_result& result);

}  // namespace switchadj
