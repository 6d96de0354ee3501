#include "switchadj/trial_sim.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "switchadj/errors.hpp"
#include "switchadj/quadrature.hpp"

namespace switchadj {

void scenario_spec::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw config_error(fmt::format("{} must lie in [0, 1], got {}", name, p));
  };
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw config_error(fmt::format("{} must be positive, got {}", name, v));
  };
  prob(pmix, "pmix");
  prob(rct_badprog_prob, "rct_badprog_prob");
  prob(external_badprog_prob, "external_badprog_prob");
  prob(u_prob, "u_prob");
  prob(external_u_prob_b, "external_u_prob_b");
  positive(lambda1, "lambda1");
  positive(lambda2, "lambda2");
  positive(gamma1, "gamma1");
  positive(gamma2, "gamma2");
  positive(time_scale, "time_scale");
  positive(omega, "omega");
  positive(allocation_ratio, "allocation_ratio");
  positive(pfs_beta_a, "pfs_beta_a");
  positive(pfs_beta_b, "pfs_beta_b");
  positive(visit_interval, "visit_interval");
  positive(end_date, "end_date");
  positive(bracket_upper, "bracket_upper");
  if (rct_size < 1) throw config_error("rct_size must be at least 1");
  if (external_size < 1) throw config_error("external_size must be at least 1");
  for (double v : {delta1, delta2, delta3, switch_u_reduction}) {
    if (!std::isfinite(v)) throw config_error("effect parameters must be finite");
  }
}

scenario_spec scenario_preset(int scenario) {
  if (scenario < 1 || scenario > 8) throw config_error(fmt::format("scenario must be 1-8, got {}", scenario));
  const int k = scenario - 1;
  const bool high_effect = (k % 2) == 1;
  const bool high_switching = ((k / 2) % 2) == 1;
  const bool censored = k >= 4;

  scenario_spec spec;
  spec.delta1 = high_effect ? -0.5 : -0.2;
  // Switching benefit calibrated to reproduce the reported ITT bias per
  // treatment-effect level.
  spec.omega = high_effect ? 1.42 : 1.15;
  spec.switching = high_switching ? switching_level::high : switching_level::moderate;
  spec.end_date = censored ? 546.0 : 5000.0;
  return spec;
}

double baseline_survival(double t, const scenario_spec& spec) {
  if (t <= 0.0) return 1.0;
  return spec.pmix * std::exp(-spec.lambda1 * std::pow(t, spec.gamma1)) +
         (1.0 - spec.pmix) * std::exp(-spec.lambda2 * std::pow(t, spec.gamma2));
}

double linear_predictor(int arm, int badprog, int u, const scenario_spec& spec) {
  return spec.delta1 * arm + spec.delta2 * badprog + spec.delta3 * u;
}

double sample_os(int arm, int badprog, int u, const scenario_spec& spec, double draw) {
  if (!(draw > 0.0 && draw < 1.0)) throw sampling_error(fmt::format("uniform draw {} outside (0, 1)", draw));
  const double hr = std::exp(linear_predictor(arm, badprog, u, spec));
  const double target = std::log1p(-draw);
  // S0(t)^hr <= 1 - draw  <=>  hr log S0(t) <= log(1 - draw)
  auto reached = [&](double t) {
    const double s = baseline_survival(t, spec);
    return s <= 0.0 || hr * std::log(s) <= target;
  };
  double lo = 0.0;
  double hi = spec.bracket_upper;
  if (!reached(hi)) {
    throw sampling_error(fmt::format("survival does not fall below {} within the bracket [0, {}]",
                                     1.0 - draw, spec.bracket_upper));
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (reached(mid) ? hi : lo) = mid;
  }
  return hi * spec.time_scale;
}

double switch_probability(int badprog, int u, const scenario_spec& spec) {
  double p = spec.switching == switching_level::moderate ? 0.8 * badprog + 0.3 * (1 - badprog)
                                                         : 0.9 * badprog + 0.6 * (1 - badprog);
  if (spec.cond == condition::C) p -= spec.switch_u_reduction * u;
  return std::clamp(p, 0.0, 1.0);
}

double unmeasured_probability(source_kind source, const scenario_spec& spec) {
  if (spec.cond == condition::B && source == source_kind::external) return spec.external_u_prob_b;
  return spec.u_prob;
}

subject_record simulate_subject(source_kind source, int arm, const scenario_spec& spec,
                                random_stream& stream) {
  subject_record r;
  r.source = source;
  r.arm = source == source_kind::external ? 0 : arm;
  r.end_date = spec.end_date;

  const double p_bad = source == source_kind::rct ? spec.rct_badprog_prob : spec.external_badprog_prob;
  r.badprog = stream.bernoulli(p_bad) ? 1 : 0;
  r.u = stream.bernoulli(unmeasured_probability(source, spec)) ? 1 : 0;
  const double os = sample_os(r.arm, r.badprog, r.u, spec, stream.uniform());
  const double pfs_fraction = stream.beta(spec.pfs_beta_a, spec.pfs_beta_b);
  const double switch_draw = stream.uniform();

  const double ttp_exact = os * pfs_fraction;
  const double ttp_visit = std::min(os, std::ceil(ttp_exact / spec.visit_interval) * spec.visit_interval);
  const double pps_true = os - ttp_visit;

  const bool may_switch = source == source_kind::rct && r.arm == 0;
  r.switched = may_switch && switch_draw < switch_probability(r.badprog, r.u, spec) ? 1 : 0;
  const double os_switch = ttp_visit + (r.switched ? pps_true * spec.omega : pps_true);

  const double end = spec.end_date;
  auto censor = [end](double t, double& time, int& status) {
    status = t < end ? 1 : 0;
    time = std::min(t, end);
  };
  censor(os_switch, r.os_observed, r.os_observed_status);
  censor(os, r.os_noswitch, r.os_noswitch_status);
  censor(ttp_exact, r.ttp_exact, r.ttp_exact_status);
  censor(ttp_visit, r.ttp, r.ttp_status);

  r.pps_status = 1;
  r.pps = r.os_observed - r.ttp;
  if (r.ttp_status == 0) {
    r.pps_status = 0;
    r.pps = 0.0;
  }
  if (r.os_observed_status == 0) {
    r.pps_status = 0;
    r.pps = r.os_observed - r.ttp;
  }
  return r;
}

int experimental_count(const scenario_spec& spec) {
  const double share = spec.allocation_ratio / (spec.allocation_ratio + 1.0);
  // Integer arithmetic for the default 2:1 so floor(2N/3) is exact.
  if (spec.allocation_ratio == std::floor(spec.allocation_ratio)) {
    const long r = static_cast<long>(spec.allocation_ratio);
    return static_cast<int>(spec.rct_size * r / (r + 1));
  }
  return static_cast<int>(std::floor(spec.rct_size * share));
}

namespace {

trial_dataset simulate_cohort(const scenario_spec& spec, std::uint64_t seed, source_kind source) {
  spec.validate();
  trial_dataset data;
  data.source = source;
  data.end_date = spec.end_date;
  const int n = source == source_kind::rct ? spec.rct_size : spec.external_size;
  const int n_exp = source == source_kind::rct ? experimental_count(spec) : 0;
  const std::uint64_t key = derive_key(seed, {static_cast<std::uint64_t>(source)});
  data.subjects.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    random_stream stream(key, static_cast<std::uint64_t>(i));
    subject_record r = simulate_subject(source, i < n_exp ? 1 : 0, spec, stream);
    r.id = i + 1;
    data.subjects.push_back(r);
  }
  return data;
}

}  // namespace

trial_dataset simulate_rct(const scenario_spec& spec, std::uint64_t seed) {
  return simulate_cohort(spec, seed, source_kind::rct);
}

trial_dataset simulate_external(const scenario_spec& spec, std::uint64_t seed) {
  return simulate_cohort(spec, seed, source_kind::external);
}

double true_control_rmst(const scenario_spec& spec, double t_star) {
  if (!(t_star > 0.0)) throw config_error("t_star must be positive");
  const double pb = spec.rct_badprog_prob;
  const double pu = unmeasured_probability(source_kind::rct, spec);
  auto integrand = [&](double days) {
    const double s0 = baseline_survival(days / spec.time_scale, spec);
    double s = 0.0;
    for (int b = 0; b <= 1; ++b) {
      for (int u = 0; u <= 1; ++u) {
        const double mass = (b ? pb : 1.0 - pb) * (u ? pu : 1.0 - pu);
        if (mass > 0.0) s += mass * std::pow(s0, std::exp(linear_predictor(0, b, u, spec)));
      }
    }
    return s;
  };
  return adaptive_simpson(integrand, 0.0, t_star, {1e-3});
}

const char* to_string(condition c) {
  switch (c) {
    case condition::A: return "A";
    case condition::B: return "B";
    case condition::C: return "C";
  }
  return "?";
}

const char* to_string(switching_level s) { return s == switching_level::moderate ? "moderate" : "high"; }

const char* to_string(source_kind s) { return s == source_kind::rct ? "rct" : "external"; }

condition parse_condition(const std::string& text) {
  if (text == "A" || text == "a") return condition::A;
  if (text == "B" || text == "b") return condition::B;
  if (text == "C" || text == "c") return condition::C;
  throw config_error(fmt::format("unknown condition '{}' (expected A, B or C)", text));
}

switching_level parse_switching_level(const std::string& text) {
  if (text == "moderate") return switching_level::moderate;
  if (text == "high") return switching_level::high;
  throw config_error(fmt::format("unknown switching level '{}' (expected moderate or high)", text));
}

source_kind parse_source(const std::string& text) {
  if (text == "rct") return source_kind::rct;
  if (text == "external") return source_kind::external;
  throw config_error(fmt::format("unknown source '{}' (expected rct or external)", text));
}

}  // namespace switchadj
