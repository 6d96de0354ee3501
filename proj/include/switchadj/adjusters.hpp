#pragma once

#include <optional>
#include <string>
#include <vector>

#include "switchadj/model_fit.hpp"
#include "switchadj/survival_kernel.hpp"
#include "switchadj/trial_sim.hpp"

namespace switchadj {

enum class method_kind { itt, oracle, tse, atse, eca };
enum class recensor_mode { off, switchers_only, all_control };

/// A method plus its parameter; `decay` is only read for ATSE.
struct method_spec {
  method_kind kind = method_kind::itt;
  double decay = 1.0;

  std::string label() const;
  bool operator==(const method_spec&) const = default;
};

struct adjusted_row {
  int id = 0;
  int arm = 0;
  double time = 0.0;
  int status = 0;
  double weight = 1.0;
};

struct relative_effect_result {
  double acceleration_factor = 1.0;
  double log_af_se = 0.0;
  double rmst_experimental = 0.0;
  double rmst_control = 0.0;
  double drmst = 0.0;
};

struct analysis_options {
  std::vector<std::string> covariates = {"badprog"};
  recensor_mode recensor = recensor_mode::switchers_only;
  rmst_policy rmst;
  double t_star = 0.0;
  bool relative_effect = false;
};

struct adjustment_result {
  method_kind method = method_kind::itt;
  /// Analysis dataset: the adjusted RCT for ITT/Oracle/TSE/ATSE; weighted
  /// external controls plus RCT experimental rows for ECA.
  std::vector<adjusted_row> rows;
  std::optional<double> mu_hat;
  std::optional<double> mu_se;
  std::optional<double> rho_hat;
  std::optional<double> rho_se;
  std::optional<double> external_weight;
  std::optional<double> effective_external_events;
  std::optional<double> decay;
  int external_events = 0;
  std::vector<double> att_weights;
  double control_rmst = 0.0;
  std::optional<relative_effect_result> effect;
  recensor_mode recensor = recensor_mode::off;
  /// TSE/ATSE found no switchers and fell back to the ITT analysis.
  bool degenerate = false;
};

/// Post-progression row of an RCT control subject.
struct pps_row {
  int id = 0;
  bool switched = false;
  double pps = 0.0;
  int status = 0;
  double horizon = 0.0;  // administrative PPS censoring horizon, max(0, end - ttp)
};

double counterfactual_pps(double pps, bool switched, double mu_hat);

/// Truncates covered rows at min(horizon, horizon * exp(-mu_hat)).
std::vector<pps_row> recensor(std::vector<pps_row> rows, double mu_hat, recensor_mode mode);

/// exp(-c |rho|), floored at the smallest normal double.
double decay_weight(double rho_hat, double c);

struct dissimilarity_result {
  double rho_hat = 0.0;
  double rho_se = 0.0;
  double weight = 1.0;
  aft_fit fit;
};

/// Fits PPS ~ source + covariates on RCT non-switching controls and external
/// subjects with observed progression; weight = exp(-c |rho_hat|).
dissimilarity_result atse_dissimilarity(const trial_dataset& rct, const trial_dataset& external,
                                        const std::vector<std::string>& covariates, double c);

/// Counterfactual reconstruction of the RCT given a switching effect.
adjustment_result apply_switch_adjustment(const trial_dataset& rct, double mu_hat,
                                          const analysis_options& options);

adjustment_result itt_estimate(const trial_dataset& rct, const analysis_options& options);
adjustment_result oracle_estimate(const trial_dataset& rct, const analysis_options& options);
adjustment_result tse_adjust(const trial_dataset& rct, const analysis_options& options);
adjustment_result atse_adjust(const trial_dataset& rct, const trial_dataset& external, double c,
                              const analysis_options& options);
/// ATSE steps 2-4 with a given external weight (steps 1 skipped).
adjustment_result atse_adjust_with_weight(const trial_dataset& rct, const trial_dataset& external,
                                          double external_weight, const analysis_options& options);
adjustment_result eca_estimate(const trial_dataset& rct, const trial_dataset& external,
                               const analysis_options& options);

/// Weibull AFT of time on arm (AF = exp(arm coefficient)) and RMST difference.
relative_effect_result relative_effect(const std::vector<adjusted_row>& rows, double t_star,
                                       rmst_policy policy);

adjustment_result run_method(const method_spec& method, const trial_dataset& rct,
                             const trial_dataset& external, const analysis_options& options);

std::vector<adjusted_row> control_rows(const adjustment_result& result);

const char* to_string(method_kind kind);
const char* to_string(recensor_mode mode);
method_kind parse_method_kind(const std::string& text);
recensor_mode parse_recensor_mode(const std::string& text);

}  // namespace switchadj
