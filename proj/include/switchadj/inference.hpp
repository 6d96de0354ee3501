#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "switchadj/adjusters.hpp"
#include "switchadj/trial_sim.hpp"

namespace switchadj {

struct bootstrap_spec {
  int replicates = 500;
  double level = 0.95;
  /// Resample within rct-control, rct-experimental and external; otherwise
  /// within each source only.
  bool stratified = true;
  std::uint64_t seed = 0;
  int threads = 1;
  double max_failure_fraction = 0.10;

  void validate() const;
};

struct bootstrap_result {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  int replicates = 0;
  int failures = 0;
  std::vector<double> estimates;  // successful replicates in replicate order
};

using estimand_fn = std::function<double(const trial_dataset& rct, const trial_dataset& external)>;

/// Resamples subjects with replacement; stratum sizes are preserved exactly.
std::pair<trial_dataset, trial_dataset> bootstrap_resample(const trial_dataset& rct,
                                                           const trial_dataset& external,
                                                           std::uint64_t replicate_key, bool stratified);

/// Linear-interpolation sample quantile (R type 7) of sorted data.
double sample_quantile(const std::vector<double>& sorted, double p);

/// Percentile interval over replicates of the whole pipeline `estimand`.
/// Replicates throwing switchadj::error are counted as failures; more than
/// `max_failure_fraction` failures raises bootstrap_error.
bootstrap_result bootstrap_ci(const trial_dataset& rct, const trial_dataset& external,
                              const estimand_fn& estimand, const bootstrap_spec& spec);

/// Convenience: the control RMST of `method` re-run on each replicate.
bootstrap_result bootstrap_ci(const trial_dataset& rct, const trial_dataset& external,
                              const method_spec& method, const analysis_options& options,
                              const bootstrap_spec& spec);

}  // namespace switchadj
