#include "switchadj/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <thread>

#include <fmt/core.h>

#include "switchadj/errors.hpp"
#include "switchadj/rng.hpp"

namespace switchadj {

namespace {

enum stratum_id : std::uint64_t { rct_control = 0, rct_experimental = 1, external_all = 2, rct_all = 3 };

void draw_stratum(const std::vector<const subject_record*>& members, std::uint64_t key, std::uint64_t stratum,
                  std::vector<subject_record>& out) {
  if (members.empty()) return;
  random_stream stream(key, stratum);
  const auto n = static_cast<std::uint64_t>(members.size());
  for (std::uint64_t i = 0; i < n; ++i) {
    // Scaled 53-bit uniform; the index bias is negligible for n << 2^53.
    const auto pick = static_cast<std::uint64_t>(stream.uniform() * static_cast<double>(n));
    out.push_back(*members[std::min(pick, n - 1)]);
  }
}

}  // namespace

void bootstrap_spec::validate() const {
  if (replicates < 1) throw config_error("bootstrap replicate count must be at least 1");
  if (!(level > 0.0 && level < 1.0)) throw config_error("confidence level must lie in (0, 1)");
  if (threads < 1) throw config_error("thread budget must be at least 1");
  if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) {
    throw config_error("failure fraction must lie in [0, 1]");
  }
}

std::pair<trial_dataset, trial_dataset> bootstrap_resample(const trial_dataset& rct, const trial_dataset& external,
                                                           std::uint64_t replicate_key, bool stratified) {
  trial_dataset r = rct, e = external;
  r.subjects.clear();
  e.subjects.clear();
  r.subjects.reserve(rct.subjects.size());
  e.subjects.reserve(external.subjects.size());

  std::vector<const subject_record*> control, experimental, all_rct, ext;
  for (const auto& s : rct.subjects) {
    (s.arm == 0 ? control : experimental).push_back(&s);
    all_rct.push_back(&s);
  }
  for (const auto& s : external.subjects) ext.push_back(&s);

  if (stratified) {
    draw_stratum(control, replicate_key, rct_control, r.subjects);
    draw_stratum(experimental, replicate_key, rct_experimental, r.subjects);
  } else {
    draw_stratum(all_rct, replicate_key, rct_all, r.subjects);
  }
  draw_stratum(ext, replicate_key, external_all, e.subjects);
  return {std::move(r), std::move(e)};
}

double sample_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw config_error("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

bootstrap_result bootstrap_ci(const trial_dataset& rct, const trial_dataset& external, const estimand_fn& estimand,
                              const bootstrap_spec& spec) {
  spec.validate();
  bootstrap_result result;
  result.level = spec.level;
  result.replicates = spec.replicates;
  result.point = estimand(rct, external);

  std::vector<std::optional<double>> values(static_cast<std::size_t>(spec.replicates));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int b = next++; b < spec.replicates; b = next++) {
      const auto [r, e] = bootstrap_resample(rct, external, derive_key(spec.seed, {static_cast<std::uint64_t>(b)}),
                                             spec.stratified);
      try {
        values[static_cast<std::size_t>(b)] = estimand(r, e);
      } catch (const error&) {
        // failed replicate: counted below, not retried
      }
    }
  };
  const int threads = std::min(spec.threads, spec.replicates);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (const auto& v : values) {
    if (v) {
      result.estimates.push_back(*v);
    } else {
      ++result.failures;
    }
  }
  if (result.failures > spec.max_failure_fraction * spec.replicates || result.estimates.empty()) {
    throw bootstrap_error(fmt::format("{} of {} bootstrap replicates failed", result.failures, spec.replicates));
  }
  std::vector<double> sorted = result.estimates;
  std::sort(sorted.begin(), sorted.end());
  const double alpha = 1.0 - spec.level;
  result.lower = sample_quantile(sorted, alpha / 2.0);
  result.upper = sample_quantile(sorted, 1.0 - alpha / 2.0);
  return result;
}

bootstrap_result bootstrap_ci(const trial_dataset& rct, const trial_dataset& external, const method_spec& method,
                              const analysis_options& options, const bootstrap_spec& spec) {
  return bootstrap_ci(
      rct, external,
      [&](const trial_dataset& r, const trial_dataset& e) { return run_method(method, r, e, options).control_rmst; },
      spec);
}

}  // namespace switchadj
