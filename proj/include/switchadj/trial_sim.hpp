#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "switchadj/rng.hpp"

namespace switchadj {

enum class switching_level { moderate, high };
enum class condition { A, B, C };
enum class source_kind { rct, external };

/*!
 * Data-generating configuration for one trial scenario.
 *
 * Hazard: h(t) = h0(t) exp(delta1 trt + delta2 badprog + delta3 u), with a
 * two-component mixture Weibull baseline survival on a model time axis;
 * `time_scale` converts model time to days. The baseline defaults are
 * calibrated so the control-arm RMST truth is 472.75 days at t* = 5000 and
 * 368.60 days at t* = 546.
 */
struct scenario_spec {
  double pmix = 0.5;
  double lambda1 = 12.5;
  double lambda2 = 1.687891038488;
  double gamma1 = 2.0;
  double gamma2 = 3.0;
  double time_scale = 939.4592619362;  // days per model time unit

  double delta1 = -0.2;  // treatment log-HR
  double delta2 = 0.3;   // bad prognosis log-HR
  double delta3 = -0.3;  // unmeasured factor log-HR
  double omega = 1.1;    // multiplier applied to a switcher's post-progression time

  switching_level switching = switching_level::moderate;
  condition cond = condition::A;

  int rct_size = 500;
  double allocation_ratio = 2.0;  // experimental : control
  int external_size = 200;
  double rct_badprog_prob = 0.5;
  double external_badprog_prob = 0.75;
  double u_prob = 0.5;
  double external_u_prob_b = 0.75;  // external Pr(u = 1) under condition B
  double switch_u_reduction = 0.2;  // condition C reduction for u = 1

  double pfs_beta_a = 5.0;
  double pfs_beta_b = 10.0;
  double visit_interval = 21.0;
  double end_date = 5000.0;
  double bracket_upper = 1e6;  // model time units

  void validate() const;
};

/// The eight standard scenarios (treatment effect x switching level x censoring), condition A.
scenario_spec scenario_preset(int scenario);

struct subject_record {
  int id = 0;
  source_kind source = source_kind::rct;
  int arm = 0;
  int badprog = 0;
  int u = 0;
  double ttp_exact = 0.0;
  int ttp_exact_status = 0;
  double ttp = 0.0;
  int ttp_status = 0;
  double pps = 0.0;
  int pps_status = 0;
  double os_observed = 0.0;
  int os_observed_status = 0;
  double os_noswitch = 0.0;
  int os_noswitch_status = 0;
  int switched = 0;
  double end_date = 0.0;
};

struct trial_dataset {
  source_kind source = source_kind::rct;
  double end_date = 0.0;
  std::vector<subject_record> subjects;
  bool has_oracle_columns = true;
};

/// S0(t) on the model time axis.
double baseline_survival(double t, const scenario_spec& spec);

/// Linear predictor delta1 arm + delta2 badprog + delta3 u.
double linear_predictor(int arm, int badprog, int u, const scenario_spec& spec);

/// Inverts 1 - S0(t)^exp(lp) = draw by bisection; returns days.
double sample_os(int arm, int badprog, int u, const scenario_spec& spec, double draw);

double switch_probability(int badprog, int u, const scenario_spec& spec);

/// Pr(u = 1) for a subject from `source` under the spec's condition.
double unmeasured_probability(source_kind source, const scenario_spec& spec);

subject_record simulate_subject(source_kind source, int arm, const scenario_spec& spec,
                                random_stream& stream);

/// Experimental count floor(N r / (r + 1)); subjects [0, n_exp) are experimental.
int experimental_count(const scenario_spec& spec);

/// Subject i draws from stream (derive_key(seed, {source}), i).
trial_dataset simulate_rct(const scenario_spec& spec, std::uint64_t seed);
trial_dataset simulate_external(const scenario_spec& spec, std::uint64_t seed);

/// Control-arm RMST truth on [0, t_star] days by adaptive Simpson quadrature.
double true_control_rmst(const scenario_spec& spec, double t_star);

const char* to_string(condition c);
const char* to_string(switching_level s);
const char* to_string(source_kind s);
condition parse_condition(const std::string& text);
switching_level parse_switching_level(const std::string& text);
source_kind parse_source(const std::string& text);

}  // namespace switchadj
