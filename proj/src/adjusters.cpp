#include "switchadj/adjusters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "switchadj/errors.hpp"

namespace switchadj {

namespace {

// Post-progression times at or below zero (death at the progression visit)
// are floored for the log-time likelihood; half a day is below the visit grid.
constexpr double kPpsFloor = 0.5;

// Position of the switching (or source) indicator among the covariates.
constexpr std::size_t kLeadCoefficient = 0;

double covariate_value(const subject_record& s, const std::string& name) {
  if (name == "badprog") return s.badprog;
  if (name == "u") return s.u;
  throw config_error(fmt::format("unknown covariate '{}' (expected badprog or u)", name));
}

void check_covariates(const trial_dataset& data, const std::vector<std::string>& covariates) {
  for (const auto& name : covariates) {
    covariate_value(subject_record{}, name);
    if (name == "u" && !data.has_oracle_columns) {
      throw config_error("covariate 'u' requested but the dataset has no oracle columns");
    }
  }
}

void check_options(const analysis_options& options) {
  if (!(options.t_star > 0.0)) throw config_error("t_star must be positive");
}

design_row pps_design_row(const subject_record& s, double leading, const std::vector<std::string>& covariates,
                          double weight) {
  design_row row;
  row.outcome = std::max(s.pps, kPpsFloor);
  row.status = s.pps_status;
  row.weight = weight;
  row.covariates.reserve(covariates.size() + 1);
  row.covariates.push_back(leading);
  for (const auto& name : covariates) row.covariates.push_back(covariate_value(s, name));
  return row;
}

bool is_progressed_control(const subject_record& s) { return s.arm == 0 && s.ttp_status == 1; }

std::vector<design_row> switching_rows(const trial_dataset& rct, const std::vector<std::string>& covariates) {
  std::vector<design_row> rows;
  for (const auto& s : rct.subjects) {
    if (is_progressed_control(s)) rows.push_back(pps_design_row(s, s.switched, covariates, 1.0));
  }
  return rows;
}

bool has_switcher(const trial_dataset& rct) {
  return std::any_of(rct.subjects.begin(), rct.subjects.end(),
                     [](const subject_record& s) { return is_progressed_control(s) && s.switched; });
}

std::vector<survival_observation> arm_observations(const std::vector<adjusted_row>& rows, int arm) {
  std::vector<survival_observation> obs;
  for (const auto& r : rows) {
    if (r.arm == arm) obs.push_back({r.time, r.status, r.weight});
  }
  return obs;
}

void finish(adjustment_result& result, const analysis_options& options) {
  const auto control = arm_observations(result.rows, 0);
  if (control.empty()) throw config_error("dataset has no control-arm subjects");
  result.control_rmst = sample_rmst(control, options.t_star, options.rmst);
  if (options.relative_effect) result.effect = relative_effect(result.rows, options.t_star, options.rmst);
}

adjustment_result observed_analysis(const trial_dataset& rct, const analysis_options& options, bool oracle) {
  check_options(options);
  if (rct.subjects.empty()) throw config_error("RCT dataset is empty");
  if (oracle && !rct.has_oracle_columns) {
    throw config_error("the oracle analysis needs os_noswitch, which this dataset omits");
  }
  adjustment_result result;
  result.method = oracle ? method_kind::oracle : method_kind::itt;
  result.rows.reserve(rct.subjects.size());
  for (const auto& s : rct.subjects) {
    if (oracle) {
      result.rows.push_back({s.id, s.arm, s.os_noswitch, s.os_noswitch_status, 1.0});
    } else {
      result.rows.push_back({s.id, s.arm, s.os_observed, s.os_observed_status, 1.0});
    }
  }
  finish(result, options);
  return result;
}

adjustment_result degenerate_result(const trial_dataset& rct, const analysis_options& options, method_kind kind) {
  adjustment_result result = observed_analysis(rct, options, false);
  result.method = kind;
  result.recensor = options.recensor;
  result.degenerate = true;
  return result;
}

}  // namespace

std::string method_spec::label() const {
  if (kind == method_kind::atse) return fmt::format("ATSE(c={})", decay);
  switch (kind) {
    case method_kind::itt: return "ITT";
    case method_kind::oracle: return "Oracle";
    case method_kind::tse: return "TSE";
    case method_kind::eca: return "ECA";
    default: return "?";
  }
}

double counterfactual_pps(double pps, bool switched, double mu_hat) {
  if (pps < 0.0) throw config_error("post-progression time must be nonnegative");
  return switched ? pps / std::exp(mu_hat) : pps;
}

std::vector<pps_row> recensor(std::vector<pps_row> rows, double mu_hat, recensor_mode mode) {
  if (mode == recensor_mode::off) return rows;
  const double shrink = std::exp(-mu_hat);
  for (auto& r : rows) {
    if (mode == recensor_mode::switchers_only && !r.switched) continue;
    const double limit = std::min(r.horizon, r.horizon * shrink);
    if (r.pps > limit) {
      r.pps = limit;
      r.status = 0;
    }
  }
  return rows;
}

double decay_weight(double rho_hat, double c) {
  if (!(c > 0.0)) throw config_error("decay factor c must be positive");
  return std::max(std::exp(-c * std::abs(rho_hat)), std::numeric_limits<double>::min());
}

dissimilarity_result atse_dissimilarity(const trial_dataset& rct, const trial_dataset& external,
                                        const std::vector<std::string>& covariates, double c) {
  check_covariates(rct, covariates);
  check_covariates(external, covariates);
  std::vector<design_row> rows;
  double rct_events = 0.0, external_events = 0.0;
  for (const auto& s : rct.subjects) {
    if (is_progressed_control(s) && !s.switched) {
      rows.push_back(pps_design_row(s, 1.0, covariates, 1.0));
      rct_events += s.pps_status;
    }
  }
  for (const auto& s : external.subjects) {
    if (s.ttp_status == 1) {
      rows.push_back(pps_design_row(s, 0.0, covariates, 1.0));
      external_events += s.pps_status;
    }
  }
  if (rct_events == 0.0 || external_events == 0.0) {
    throw non_identifiable_error("cohort dissimilarity needs post-progression events in both cohorts");
  }
  dissimilarity_result out;
  out.fit = fit_weibull_aft(rows);
  out.rho_hat = out.fit.coefficients[kLeadCoefficient];
  out.rho_se = out.fit.coefficient_se(kLeadCoefficient);
  out.weight = decay_weight(out.rho_hat, c);
  return out;
}

adjustment_result apply_switch_adjustment(const trial_dataset& rct, double mu_hat,
                                          const analysis_options& options) {
  check_options(options);
  std::vector<pps_row> pps;
  for (const auto& s : rct.subjects) {
    if (!is_progressed_control(s)) continue;
    pps_row r;
    r.id = s.id;
    r.switched = s.switched != 0;
    r.pps = counterfactual_pps(s.pps, r.switched, mu_hat);
    r.status = s.pps_status;
    r.horizon = std::max(0.0, s.end_date - s.ttp);
    pps.push_back(r);
  }
  pps = recensor(std::move(pps), mu_hat, options.recensor);

  adjustment_result result;
  result.method = method_kind::tse;
  result.mu_hat = mu_hat;
  result.recensor = options.recensor;
  result.rows.reserve(rct.subjects.size());
  std::size_t k = 0;
  for (const auto& s : rct.subjects) {
    if (!is_progressed_control(s)) {
      result.rows.push_back({s.id, s.arm, s.os_observed, s.os_observed_status, 1.0});
      continue;
    }
    const pps_row& r = pps[k++];
    if (r.pps == s.pps && r.status == s.pps_status) {
      // Unchanged rows keep the observed OS exactly (ttp + pps may round).
      result.rows.push_back({s.id, s.arm, s.os_observed, s.os_observed_status, 1.0});
    } else {
      result.rows.push_back({s.id, s.arm, s.ttp + r.pps, r.status, 1.0});
    }
  }
  finish(result, options);
  return result;
}

adjustment_result itt_estimate(const trial_dataset& rct, const analysis_options& options) {
  return observed_analysis(rct, options, false);
}

adjustment_result oracle_estimate(const trial_dataset& rct, const analysis_options& options) {
  return observed_analysis(rct, options, true);
}

adjustment_result tse_adjust(const trial_dataset& rct, const analysis_options& options) {
  check_options(options);
  check_covariates(rct, options.covariates);
  if (!has_switcher(rct)) return degenerate_result(rct, options, method_kind::tse);

  const auto rows = switching_rows(rct, options.covariates);
  const aft_fit fit = fit_weibull_aft(rows);
  const double mu = fit.coefficients[kLeadCoefficient];

  adjustment_result result = apply_switch_adjustment(rct, mu, options);
  result.method = method_kind::tse;
  result.mu_se = fit.coefficient_se(kLeadCoefficient);
  return result;
}

adjustment_result atse_adjust_with_weight(const trial_dataset& rct, const trial_dataset& external,
                                          double external_weight, const analysis_options& options) {
  check_options(options);
  check_covariates(rct, options.covariates);
  check_covariates(external, options.covariates);
  if (!(external_weight >= 0.0 && external_weight <= 1.0)) {
    throw config_error("external weight must lie in [0, 1]");
  }
  if (!has_switcher(rct)) {
    adjustment_result result = degenerate_result(rct, options, method_kind::atse);
    result.external_weight = external_weight;
    return result;
  }

  auto rows = switching_rows(rct, options.covariates);
  int external_events = 0;
  for (const auto& s : external.subjects) {
    if (s.ttp_status != 1) continue;
    rows.push_back(pps_design_row(s, 0.0, options.covariates, external_weight));
    external_events += s.pps_status;
  }
  const aft_fit fit = fit_weibull_aft(rows);
  const double mu = fit.coefficients[kLeadCoefficient];

  adjustment_result result = apply_switch_adjustment(rct, mu, options);
  result.method = method_kind::atse;
  result.mu_se = fit.coefficient_se(kLeadCoefficient);
  result.external_weight = external_weight;
  result.external_events = external_events;
  result.effective_external_events = external_weight * external_events;
  return result;
}

adjustment_result atse_adjust(const trial_dataset& rct, const trial_dataset& external, double c,
                              const analysis_options& options) {
  if (!(c > 0.0)) throw config_error("decay factor c must be positive");
  const bool usable = std::any_of(external.subjects.begin(), external.subjects.end(),
                                  [](const subject_record& s) { return s.ttp_status == 1; });
  if (!usable) {
    // Nothing to borrow: the method reduces to TSE.
    adjustment_result result = tse_adjust(rct, options);
    result.method = method_kind::atse;
    result.decay = c;
    result.effective_external_events = 0.0;
    return result;
  }
  const dissimilarity_result d = atse_dissimilarity(rct, external, options.covariates, c);
  adjustment_result result = atse_adjust_with_weight(rct, external, d.weight, options);
  result.rho_hat = d.rho_hat;
  result.rho_se = d.rho_se;
  result.decay = c;
  return result;
}

adjustment_result eca_estimate(const trial_dataset& rct, const trial_dataset& external,
                               const analysis_options& options) {
  check_options(options);
  check_covariates(rct, options.covariates);
  check_covariates(external, options.covariates);
  if (rct.subjects.empty() || external.subjects.empty()) {
    throw non_identifiable_error("ECA propensity model needs both RCT and external subjects");
  }

  auto features = [&](const subject_record& s) {
    std::vector<double> x;
    for (const auto& name : options.covariates) x.push_back(covariate_value(s, name));
    return x;
  };
  std::vector<design_row> rows;
  rows.reserve(rct.subjects.size() + external.subjects.size());
  for (const auto& s : rct.subjects) rows.push_back({1.0, 1, features(s), 1.0});
  for (const auto& s : external.subjects) rows.push_back({0.0, 1, features(s), 1.0});
  const logistic_fit ps = fit_logistic(rows);

  adjustment_result result;
  result.method = method_kind::eca;
  for (const auto& s : external.subjects) {
    const double e = ps.probability(features(s));
    const double w = e / (1.0 - e);
    result.att_weights.push_back(w);
    result.rows.push_back({s.id, 0, s.os_observed, s.os_observed_status, w});
  }
  for (const auto& s : rct.subjects) {
    if (s.arm == 1) result.rows.push_back({s.id, 1, s.os_observed, s.os_observed_status, 1.0});
  }
  finish(result, options);
  return result;
}

relative_effect_result relative_effect(const std::vector<adjusted_row>& rows, double t_star, rmst_policy policy) {
  const auto treated = arm_observations(rows, 1);
  const auto control = arm_observations(rows, 0);
  auto has_event = [](const std::vector<survival_observation>& obs) {
    return std::any_of(obs.begin(), obs.end(), [](const auto& o) { return o.status == 1 && o.weight > 0.0; });
  };
  if (!has_event(treated) || !has_event(control)) {
    throw non_identifiable_error("relative effect needs events in both arms");
  }
  std::vector<design_row> design;
  design.reserve(rows.size());
  for (const auto& r : rows) design.push_back({r.time, r.status, {static_cast<double>(r.arm)}, r.weight});
  const aft_fit fit = fit_weibull_aft(design);

  relative_effect_result out;
  out.acceleration_factor = std::exp(fit.coefficients[0]);
  out.log_af_se = fit.coefficient_se(0);
  out.rmst_experimental = sample_rmst(treated, t_star, policy);
  out.rmst_control = sample_rmst(control, t_star, policy);
  out.drmst = out.rmst_experimental - out.rmst_control;
  return out;
}

adjustment_result run_method(const method_spec& method, const trial_dataset& rct, const trial_dataset& external,
                             const analysis_options& options) {
  switch (method.kind) {
    case method_kind::itt: return itt_estimate(rct, options);
    case method_kind::oracle: return oracle_estimate(rct, options);
    case method_kind::tse: return tse_adjust(rct, options);
    case method_kind::atse: return atse_adjust(rct, external, method.decay, options);
    case method_kind::eca: return eca_estimate(rct, external, options);
  }
  throw config_error("unknown method");
}

std::vector<adjusted_row> control_rows(const adjustment_result& result) {
  std::vector<adjusted_row> out;
  for (const auto& r : result.rows) {
    if (r.arm == 0) out.push_back(r);
  }
  return out;
}

const char* to_string(method_kind kind) {
  switch (kind) {
    case method_kind::itt: return "itt";
    case method_kind::oracle: return "oracle";
    case method_kind::tse: return "tse";
    case method_kind::atse: return "atse";
    case method_kind::eca: return "eca";
  }
  return "?";
}

const char* to_string(recensor_mode mode) {
  switch (mode) {
    case recensor_mode::off: return "off";
    case recensor_mode::switchers_only: return "switchers-only";
    case recensor_mode::all_control: return "all-control";
  }
  return "?";
}

method_kind parse_method_kind(const std::string& text) {
  if (text == "itt") return method_kind::itt;
  if (text == "oracle") return method_kind::oracle;
  if (text == "tse") return method_kind::tse;
  if (text == "atse") return method_kind::atse;
  if (text == "eca") return method_kind::eca;
  throw config_error(fmt::format("unknown method '{}' (expected itt, oracle, tse, atse or eca)", text));
}

recensor_mode parse_recensor_mode(const std::string& text) {
  if (text == "off") return recensor_mode::off;
  if (text == "switchers-only") return recensor_mode::switchers_only;
  if (text == "all-control") return recensor_mode::all_control;
  throw config_error(fmt::format("unknown re-censoring mode '{}' (expected off, switchers-only or all-control)", text));
}

}  // namespace switchadj
