#include "switchadj/survival_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <fmt/core.h>

#include "switchadj/errors.hpp"
#include "switchadj/quadrature.hpp"

namespace switchadj {

double survival_curve::at(double t) const {
  // Right-continuous: the drop at times[k] applies at t == times[k].
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 1.0;
  return survival[static_cast<std::size_t>(it - times.begin()) - 1];
}

bool survival_curve::reaches(double t_star) const {
  return max_followup >= t_star || last_value() == 0.0;
}

survival_curve km_estimate(std::span<const survival_observation> observations) {
  if (observations.empty()) throw config_error("Kaplan-Meier needs at least one observation");
  std::vector<survival_observation> rows;
  rows.reserve(observations.size());
  for (const auto& o : observations) {
    if (!(o.time > 0.0) || !std::isfinite(o.time)) {
      throw config_error(fmt::format("survival time must be positive, got {}", o.time));
    }
    if (o.status != 0 && o.status != 1) throw config_error("status must be 0 or 1");
    if (!(o.weight >= 0.0) || !std::isfinite(o.weight)) throw config_error("weights must be nonnegative");
    if (o.weight > 0.0) rows.push_back(o);
  }
  if (rows.empty()) throw config_error("Kaplan-Meier total weight is zero");

  // Time ascending, events first within a tie; the sort key is total so the
  // result does not depend on input order.
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.status != b.status) return a.status > b.status;
    return a.weight < b.weight;
  });

  survival_curve curve;
  // Risk set is accumulated from the right so every sum runs in the same order.
  std::vector<double> risk(rows.size());
  double tail = 0.0;
  for (std::size_t i = rows.size(); i-- > 0;) {
    tail += rows[i].weight;
    risk[i] = tail;
  }
  curve.max_followup = rows.back().time;

  double s = 1.0;
  std::size_t i = 0;
  while (i < rows.size()) {
    const double t = rows[i].time;
    const double n = risk[i];
    double d = 0.0;
    std::size_t j = i;
    for (; j < rows.size() && rows[j].time == t; ++j) {
      if (rows[j].status == 1) d += rows[j].weight;
    }
    if (d > 0.0) {
      s *= 1.0 - d / n;
      curve.times.push_back(t);
      curve.survival.push_back(s);
      curve.at_risk.push_back(n);
      curve.events.push_back(d);
    }
    i = j;
  }
  return curve;
}

namespace {

double step_integral(const survival_curve& curve, double upper) {
  double area = 0.0;
  double previous = 0.0;
  double value = 1.0;
  for (std::size_t k = 0; k < curve.times.size() && curve.times[k] < upper; ++k) {
    area += value * (curve.times[k] - previous);
    previous = curve.times[k];
    value = curve.survival[k];
  }
  area += value * (upper - previous);
  return area;
}

void require_intercept_only(const aft_fit* fit) {
  if (fit == nullptr) throw extrapolation_required_error("a Weibull tail fit is required to extrapolate");
  if (!fit->coefficients.empty()) throw config_error("RMST tail fit must be intercept-only");
}

}  // namespace

double rmst(const survival_curve& curve, double t_star, rmst_policy policy, const aft_fit* tail_fit) {
  if (!(t_star > 0.0)) throw config_error("t_star must be positive");

  switch (policy.mode) {
    case rmst_mode::km_only:
      if (!curve.reaches(t_star) && policy.behavior == beyond_followup::error) {
        throw extrapolation_required_error(fmt::format(
            "survival curve ends at {} before t* = {}; extrapolation required", curve.max_followup, t_star));
      }
      return step_integral(curve, t_star);

    case rmst_mode::weibull: {
      require_intercept_only(tail_fit);
      return adaptive_simpson([&](double t) { return tail_fit->survival(t); }, 0.0, t_star, {1e-6});
    }

    case rmst_mode::hybrid: {
      if (curve.reaches(t_star)) return step_integral(curve, t_star);
      require_intercept_only(tail_fit);
      const double junction = curve.max_followup;
      const double s_km = curve.at(junction);
      const double s_w = tail_fit->survival(junction);
      double tail = 0.0;
      if (s_w > 0.0) {
        tail = adaptive_simpson([&](double t) { return s_km * tail_fit->survival(t) / s_w; },
                                junction, t_star, {1e-6});
      }
      return step_integral(curve, junction) + tail;
    }
  }
  throw config_error("unknown RMST mode");
}

double truncated_mean(std::span<const double> times, double t_star) {
  if (times.empty()) throw config_error("truncated mean of an empty sample");
  double total = 0.0;
  for (double t : times) total += std::min(t, t_star);
  return total / static_cast<double>(times.size());
}

double sample_rmst(std::span<const survival_observation> observations, double t_star,
                   rmst_policy policy) {
  const survival_curve curve = km_estimate(observations);
  const bool needs_tail =
      policy.mode == rmst_mode::weibull || (policy.mode == rmst_mode::hybrid && !curve.reaches(t_star));
  if (!needs_tail) return rmst(curve, t_star, policy);

  std::vector<design_row> rows;
  rows.reserve(observations.size());
  for (const auto& o : observations) rows.push_back({o.time, o.status, {}, o.weight});
  const aft_fit tail = fit_weibull_aft(rows);
  return rmst(curve, t_star, policy, &tail);
}

const char* to_string(rmst_mode mode) {
  switch (mode) {
    case rmst_mode::km_only: return "km";
    case rmst_mode::weibull: return "weibull";
    case rmst_mode::hybrid: return "hybrid";
  }
  return "?";
}

rmst_mode parse_rmst_mode(const std::string& text) {
  if (text == "km" || text == "km-only") return rmst_mode::km_only;
  if (text == "weibull") return rmst_mode::weibull;
  if (text == "hybrid") return rmst_mode::hybrid;
  throw config_error(fmt::format("unknown RMST mode '{}' (expected km, weibull or hybrid)", text));
}

}  // namespace switchadj
