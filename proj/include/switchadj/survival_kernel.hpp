#pragma once

#include <span>
#include <string>
#include <vector>

#include "switchadj/model_fit.hpp"

namespace switchadj {

struct survival_observation {
  double time = 0.0;  // days, > 0
  int status = 1;     // 1 = event, 0 = right-censored
  double weight = 1.0;
};

/// Right-continuous step function; equals 1 before the first event time.
struct survival_curve {
  std::vector<double> times;  // distinct event times, ascending
  std::vector<double> survival;
  std::vector<double> at_risk;
  std::vector<double> events;
  double max_followup = 0.0;

  double at(double t) const;
  double last_value() const { return survival.empty() ? 1.0 : survival.back(); }
  /// True when the curve is defined on all of [0, t_star] without extrapolation.
  bool reaches(double t_star) const;
};

enum class rmst_mode { km_only, weibull, hybrid };
enum class beyond_followup { error, extend };

struct rmst_policy {
  rmst_mode mode = rmst_mode::hybrid;
  beyond_followup behavior = beyond_followup::extend;
};

/// Weighted product-limit estimator. Zero-weight rows are dropped; at tied
/// times events are processed before censorings.
survival_curve km_estimate(std::span<const survival_observation> observations);

/*!
 * Area under the survival curve on [0, t_star].
 *
 * km-only integrates the step function exactly; with behavior `extend` the
 * last value is carried flat past the largest follow-up. weibull integrates
 * the intercept-only `tail_fit` survival. hybrid integrates the KM curve up
 * to the largest follow-up time and then the Weibull survival rescaled to
 * match the KM value at that junction.
 */
double rmst(const survival_curve& curve, double t_star, rmst_policy policy,
            const aft_fit* tail_fit = nullptr);

/// Mean of min(time, t_star).
double truncated_mean(std::span<const double> times, double t_star);

/// RMST of a sample: KM plus, when the policy needs it, an intercept-only
/// Weibull tail fitted to the same observations.
double sample_rmst(std::span<const survival_observation> observations, double t_star,
                   rmst_policy policy);

const char* to_string(rmst_mode mode);
rmst_mode parse_rmst_mode(const std::string& text);

}  // namespace switchadj
