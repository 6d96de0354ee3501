#include "switchadj/study_runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include <fmt/core.h>
#include "json.hpp"

#include "switchadj/errors.hpp"

namespace switchadj {

std::vector<method_spec> default_methods() {
  return {{method_kind::oracle, 1.0}, {method_kind::itt, 1.0},  {method_kind::tse, 1.0},
          {method_kind::eca, 1.0},    {method_kind::atse, 1.0}, {method_kind::atse, 4.0},
          {method_kind::atse, 8.0}};
}

void study_config::validate() const {
  if (scenarios.empty()) throw config_error("study needs at least one scenario");
  for (int s : scenarios) {
    if (s < 1 || s > 8) throw config_error(fmt::format("scenario must be 1-8, got {}", s));
  }
  if (conditions.empty()) throw config_error("study needs at least one condition");
  if (methods.empty()) throw config_error("study needs at least one method");
  for (const auto& m : methods) {
    if (m.kind == method_kind::atse && !(m.decay > 0.0)) throw config_error("ATSE decay factor must be positive");
  }
  if (replications < 1) throw config_error("replications must be at least 1");
  if (threads < 1) throw config_error("threads must be at least 1");
  if (format != "csv" && format != "json" && format != "md") {
    throw config_error(fmt::format("unknown output format '{}' (expected csv, json or md)", format));
  }
  for (int s : scenarios) {
    for (condition c : conditions) study_scenario(*this, s, c).validate();
  }
}

study_config study_config_from_document(const key_value_document& doc) {
  study_config config;
  std::vector<std::string> method_names;
  std::vector<double> decays = {1.0, 4.0, 8.0};
  bool methods_given = false;
  for (const auto& [key, value] : doc.entries) {
    if (key == "scenarios") {
      config.scenarios.clear();
      for (const auto& s : split_list(value)) config.scenarios.push_back(static_cast<int>(parse_integer(s, key)));
    } else if (key == "conditions") {
      config.conditions.clear();
      for (const auto& s : split_list(value)) config.conditions.push_back(parse_condition(s));
    } else if (key == "methods") {
      method_names = split_list(value);
      methods_given = true;
    } else if (key == "atse_c") {
      decays.clear();
      for (const auto& s : split_list(value)) decays.push_back(parse_double(s, key));
    } else if (key == "replications") {
      config.replications = static_cast<int>(parse_integer(value, key));
    } else if (key == "seed") {
      config.seed = parse_u64(value, key);
    } else if (key == "threads") {
      config.threads = static_cast<int>(parse_integer(value, key));
    } else if (key == "rmst") {
      config.rmst.mode = parse_rmst_mode(value);
    } else if (key == "recensor") {
      config.recensor = parse_recensor_mode(value);
    } else if (key == "covariates") {
      config.covariates = split_list(value);
    } else if (key == "format") {
      config.format = value;
    } else if (key == "out") {
      config.out = value;
    } else {
      scenario_spec probe;
      if (!apply_scenario_field(probe, key, value)) {
        throw config_error(fmt::format("{}: unknown study key '{}'", doc.origin, key));
      }
      config.scenario_overrides.emplace_back(key, value);
    }
  }
  if (methods_given || decays != std::vector<double>{1.0, 4.0, 8.0}) {
    if (!methods_given) method_names = {"oracle", "itt", "tse", "eca", "atse"};
    config.methods.clear();
    for (const auto& name : method_names) {
      const method_kind kind = parse_method_kind(name);
      if (kind == method_kind::atse) {
        for (double c : decays) config.methods.push_back({kind, c});
      } else {
        config.methods.push_back({kind, 1.0});
      }
    }
  }
  config.validate();
  return config;
}

scenario_spec study_scenario(const study_config& config, int scenario, condition cond) {
  scenario_spec spec = scenario_preset(scenario);
  for (const auto& [key, value] : config.scenario_overrides) apply_scenario_field(spec, key, value);
  spec.cond = cond;
  return spec;
}

std::uint64_t replication_seed(std::uint64_t base, int scenario, condition cond, int replication) {
  return derive_key(base, {static_cast<std::uint64_t>(scenario), static_cast<std::uint64_t>(cond),
                           static_cast<std::uint64_t>(replication)});
}

replication_output run_replication(const scenario_spec& spec, const std::vector<method_spec>& methods,
                                   std::uint64_t seed, const analysis_options& options) {
  const trial_dataset rct = simulate_rct(spec, seed);
  const trial_dataset external = simulate_external(spec, seed);
  replication_output out;
  out.estimates.reserve(methods.size());
  for (const auto& m : methods) {
    try {
      out.estimates.emplace_back(run_method(m, rct, external, options).control_rmst);
    } catch (const fit_error&) {
      out.estimates.emplace_back(std::nullopt);
    } catch (const extrapolation_required_error&) {
      out.estimates.emplace_back(std::nullopt);
    } catch (const quadrature_error&) {
      out.estimates.emplace_back(std::nullopt);
    }
  }
  return out;
}

performance performance_metrics(std::span<const double> estimates, double truth) {
  if (!(truth > 0.0)) throw config_error("truth must be positive");
  if (estimates.empty()) throw config_error("performance metrics need at least one estimate");
  const double n = static_cast<double>(estimates.size());
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= n;
  double ss = 0.0, sq_err = 0.0;
  for (double e : estimates) {
    ss += (e - mean) * (e - mean);
    sq_err += (e - truth) * (e - truth);
  }
  performance p;
  p.bias_pct = 100.0 * (mean - truth) / truth;
  p.se_pct = estimates.size() > 1 ? 100.0 * std::sqrt(ss / (n - 1.0)) / truth : 0.0;
  p.rmse_pct = 100.0 * std::sqrt(sq_err / n) / truth;
  return p;
}

study_result run_study(const study_config& config) {
  config.validate();
  study_result result;
  analysis_options options;
  options.covariates = config.covariates;
  options.recensor = config.recensor;
  options.rmst = config.rmst;

  for (int scenario : config.scenarios) {
    for (condition cond : config.conditions) {
      const scenario_spec spec = study_scenario(config, scenario, cond);
      options.t_star = spec.end_date;
      const double truth = true_control_rmst(spec, options.t_star);

      const auto reps = static_cast<std::size_t>(config.replications);
      std::vector<replication_output> outputs(reps);
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t r = next++; r < reps; r = next++) {
          outputs[r] = run_replication(spec, config.methods,
                                       replication_seed(config.seed, scenario, cond, static_cast<int>(r)), options);
        }
      };
      const int threads = std::min<int>(config.threads, config.replications);
      if (threads <= 1) {
        worker();
      } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
      }

      for (std::size_t m = 0; m < config.methods.size(); ++m) {
        metrics_cell cell;
        cell.scenario = scenario;
        cell.cond = cond;
        cell.method = config.methods[m];
        cell.replications = config.replications;
        cell.truth = truth;
        std::vector<double> values;
        for (std::size_t r = 0; r < reps; ++r) {
          const auto& e = outputs[r].estimates[m];
          result.raw.push_back({scenario, cond, static_cast<int>(r), cell.method.label(), e});
          if (e) {
            values.push_back(*e);
          } else {
            ++cell.failures;
          }
        }
        if (values.empty()) {
          const double nan = std::numeric_limits<double>::quiet_NaN();
          cell.perf = {nan, nan, nan};
        } else {
          cell.perf = performance_metrics(values, truth);
        }
        result.cells.push_back(cell);
      }
    }
  }
  return result;
}

namespace {

std::string number(double v, int digits) {
  if (!std::isfinite(v)) return "NA";
  return fmt::format("{:.{}f}", v, digits);
}

std::string format_markdown(const study_result& result) {
  std::vector<int> scenarios;
  for (const auto& c : result.cells) {
    if (std::find(scenarios.begin(), scenarios.end(), c.scenario) == scenarios.end()) scenarios.push_back(c.scenario);
  }
  std::string out;
  for (int s : scenarios) {
    std::vector<condition> conds;
    std::vector<std::string> methods;
    double truth = 0.0;
    for (const auto& c : result.cells) {
      if (c.scenario != s) continue;
      if (std::find(conds.begin(), conds.end(), c.cond) == conds.end()) conds.push_back(c.cond);
      if (std::find(methods.begin(), methods.end(), c.method.label()) == methods.end()) {
        methods.push_back(c.method.label());
      }
      truth = c.truth;
    }
    out += fmt::format("## Scenario {} (true control RMST {:.2f} days)\n\n", s, truth);
    out += "| Method |";
    for (const char* metric : {"Bias %", "SE %", "RMSE %"}) {
      for (condition c : conds) out += fmt::format(" {} {} |", metric, to_string(c));
    }
    out += " Failures |\n|---|";
    for (std::size_t k = 0; k < 3 * conds.size() + 1; ++k) out += "---:|";
    out += "\n";
    for (const auto& m : methods) {
      out += fmt::format("| {} |", m);
      int failures = 0;
      for (int metric = 0; metric < 3; ++metric) {
        for (condition cond : conds) {
          for (const auto& c : result.cells) {
            if (c.scenario != s || c.cond != cond || c.method.label() != m) continue;
            const double v = metric == 0 ? c.perf.bias_pct : metric == 1 ? c.perf.se_pct : c.perf.rmse_pct;
            out += fmt::format(" {} |", number(v, 2));
            if (metric == 0) failures += c.failures;
          }
        }
      }
      out += fmt::format(" {} |\n", failures);
    }
    out += "\n";
  }
  return out;
}

std::string format_csv(const study_result& result) {
  std::string out = "scenario,condition,method,bias_pct,se_pct,rmse_pct,failures,replications,truth\n";
  for (const auto& c : result.cells) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", c.scenario, to_string(c.cond), c.method.label(),
                       number(c.perf.bias_pct, 6), number(c.perf.se_pct, 6), number(c.perf.rmse_pct, 6), c.failures,
                       c.replications, number(c.truth, 6));
  }
  return out;
}

std::string format_json(const study_result& result) {
  auto value = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : result.cells) {
    cells.push_back({{"scenario", c.scenario},
                     {"condition", to_string(c.cond)},
                     {"method", c.method.label()},
                     {"bias_pct", value(c.perf.bias_pct)},
                     {"se_pct", value(c.perf.se_pct)},
                     {"rmse_pct", value(c.perf.rmse_pct)},
                     {"failures", c.failures},
                     {"replications", c.replications},
                     {"truth", c.truth}});
  }
  return nlohmann::json{{"cells", cells}}.dump(2) + "\n";
}

}  // namespace

std::string format_metrics(const study_result& result, const std::string& format) {
  if (format == "md") return format_markdown(result);
  if (format == "csv") return format_csv(result);
  if (format == "json") return format_json(result);
  throw config_error(fmt::format("unknown output format '{}'", format));
}

std::string format_raw_csv(const study_result& result) {
  std::string out = "scenario,condition,replication,method,estimate,failed\n";
  for (const auto& r : result.raw) {
    out += fmt::format("{},{},{},{},{},{}\n", r.scenario, to_string(r.cond), r.replication, r.method,
                       r.estimate ? fmt::format("{}", *r.estimate) : std::string("NA"), r.estimate ? 0 : 1);
  }
  return out;
}

}  // namespace switchadj
