#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "switchadj/config.hpp"
#include "switchadj/errors.hpp"
#include "switchadj/study_runner.hpp"

using namespace switchadj;

namespace {

study_config small_config(int reps) {
  study_config c;
  c.scenarios = {1};
  c.conditions = {condition::A, condition::C};
  c.replications = reps;
  c.seed = 99;
  return c;
}

}  // namespace

TEST_CASE("performance metric examples") {
  const std::vector<double> exact{100, 100, 100};
  auto p = performance_metrics(exact, 100);
  CHECK(p.bias_pct == 0.0);
  CHECK(p.se_pct == 0.0);
  CHECK(p.rmse_pct == 0.0);

  const std::vector<double> high{105, 105};
  p = performance_metrics(high, 100);
  CHECK(p.bias_pct == doctest::Approx(5.0));
  CHECK(p.se_pct == doctest::Approx(0.0));
  CHECK(p.rmse_pct == doctest::Approx(5.0));

  const std::vector<double> spread{90, 110};
  p = performance_metrics(spread, 100);
  CHECK(p.bias_pct == doctest::Approx(0.0));
  CHECK(p.se_pct == doctest::Approx(14.142135623730951));
  CHECK(p.rmse_pct == doctest::Approx(10.0));

  const std::vector<double> one{120};
  p = performance_metrics(one, 100);
  CHECK(p.se_pct == 0.0);
  CHECK(p.rmse_pct == doctest::Approx(20.0));

  CHECK_THROWS_AS(performance_metrics(spread, 0.0), config_error);
  CHECK_THROWS_AS(performance_metrics(std::vector<double>{}, 1.0), config_error);
}

TEST_CASE("RMSE decomposes into bias and SE") {
  const std::vector<double> v{420, 455, 470, 480, 505, 512, 530};
  const double truth = 472.75;
  const auto p = performance_metrics(v, truth);
  const double r = static_cast<double>(v.size());
  CHECK(p.rmse_pct * p.rmse_pct == doctest::Approx(p.bias_pct * p.bias_pct + p.se_pct * p.se_pct * (r - 1) / r));
}

TEST_CASE("a two-replication Oracle study gives one finite row") {
  study_config c;
  c.conditions = {condition::A};
  c.methods = {{method_kind::oracle}};
  c.replications = 2;
  const auto r = run_study(c);
  REQUIRE(r.cells.size() == 1);
  CHECK(std::isfinite(r.cells[0].perf.bias_pct));
  CHECK(std::isfinite(r.cells[0].perf.se_pct));
  CHECK(r.cells[0].failures == 0);
  CHECK(r.raw.size() == 2);
}

TEST_CASE("Oracle and ITT agree when switching has no effect") {
  scenario_spec spec = scenario_preset(1);
  spec.omega = 1.0;
  analysis_options o;
  o.t_star = spec.end_date;
  const auto out = run_replication(spec, {{method_kind::oracle}, {method_kind::itt}}, 5, o);
  CHECK(*out.estimates[0] == *out.estimates[1]);
}

TEST_CASE("single replication sanity") {
  const scenario_spec spec = scenario_preset(1);
  analysis_options o;
  o.t_star = spec.end_date;
  const double truth = true_control_rmst(spec, spec.end_date);
  const auto a = run_replication(spec, default_methods(), 2024, o);
  const auto b = run_replication(spec, default_methods(), 2024, o);
  REQUIRE(a.estimates.size() == default_methods().size());
  for (std::size_t m = 0; m < a.estimates.size(); ++m) {
    REQUIRE(a.estimates[m].has_value());
    CHECK(*a.estimates[m] == *b.estimates[m]);
  }
  // TSE and the three ATSE variants
  for (std::size_t m : {2u, 4u, 5u, 6u}) CHECK(std::abs(*a.estimates[m] / truth - 1.0) < 0.25);
}

TEST_CASE("output does not depend on the thread budget") {
  auto c = small_config(12);
  const auto serial = run_study(c);
  c.threads = 4;
  const auto parallel = run_study(c);
  CHECK(format_metrics(serial, "csv") == format_metrics(parallel, "csv"));
  CHECK(format_raw_csv(serial) == format_raw_csv(parallel));
}

TEST_CASE("dropping a method leaves the other cells unchanged") {
  auto c = small_config(6);
  const auto full = run_study(c);
  c.methods.erase(c.methods.begin() + 3);  // ECA
  const auto reduced = run_study(c);
  for (const auto& cell : reduced.cells) {
    bool found = false;
    for (const auto& other : full.cells) {
      if (other.cond == cell.cond && other.method == cell.method) {
        found = true;
        CHECK(other.perf.bias_pct == cell.perf.bias_pct);
        CHECK(other.perf.se_pct == cell.perf.se_pct);
      }
    }
    CHECK(found);
  }
}

TEST_CASE("seeds drive the replications") {
  auto c = small_config(4);
  const auto a = format_raw_csv(run_study(c));
  CHECK(a == format_raw_csv(run_study(c)));
  c.seed = 100;
  CHECK(a != format_raw_csv(run_study(c)));
  CHECK(replication_seed(1, 1, condition::A, 0) != replication_seed(1, 1, condition::A, 1));
  CHECK(replication_seed(1, 1, condition::A, 0) != replication_seed(1, 2, condition::A, 0));
  CHECK(replication_seed(1, 1, condition::A, 0) != replication_seed(1, 1, condition::B, 0));
}

TEST_CASE("formats") {
  study_config c;
  c.conditions = {condition::A, condition::B};
  c.methods = {{method_kind::oracle}, {method_kind::atse, 4.0}};
  c.replications = 3;
  const auto r = run_study(c);
  const auto md = format_metrics(r, "md");
  CHECK(md.find("| Method | Bias % A | Bias % B | SE % A | SE % B | RMSE % A | RMSE % B | Failures |") !=
        std::string::npos);
  CHECK(md.find("| ATSE(c=4) |") != std::string::npos);
  CHECK(format_metrics(r, "csv").rfind("scenario,condition,method,bias_pct,se_pct,rmse_pct,failures,replications,truth\n", 0) == 0);
  CHECK(format_metrics(r, "json").find("\"cells\"") != std::string::npos);
  CHECK(format_raw_csv(r).rfind("scenario,condition,replication,method,estimate,failed\n", 0) == 0);
  CHECK_THROWS_AS(format_metrics(r, "xml"), config_error);
}

TEST_CASE("study configuration documents") {
  const auto c = study_config_from_document(parse_key_value(
      "scenarios = 1, 5\nconditions = B\nmethods = tse, atse\natse_c = 2, 3\nreplications = 7\n"
      "seed = 11\nrmst = km\nrecensor = off\nomega = 1.3\nformat = csv\n"));
  CHECK(c.scenarios == std::vector<int>{1, 5});
  CHECK(c.conditions == std::vector<condition>{condition::B});
  REQUIRE(c.methods.size() == 3);
  CHECK(c.methods[1] == method_spec{method_kind::atse, 2.0});
  CHECK(c.methods[2] == method_spec{method_kind::atse, 3.0});
  CHECK(c.replications == 7);
  CHECK(c.seed == 11);
  CHECK(c.rmst.mode == rmst_mode::km_only);
  CHECK(c.recensor == recensor_mode::off);
  CHECK(study_scenario(c, 5, condition::B).omega == 1.3);
  CHECK(study_scenario(c, 5, condition::B).end_date == 546.0);

  CHECK_THROWS_AS(study_config_from_document(parse_key_value("bogus = 1\n")), config_error);
  CHECK_THROWS_AS(study_config_from_document(parse_key_value("replications = 0\n")), config_error);
  CHECK_THROWS_AS(study_config_from_document(parse_key_value("atse_c = 0\n")), config_error);
  CHECK_THROWS_AS(study_config_from_document(parse_key_value("scenarios = 9\n")), config_error);
  CHECK_THROWS_AS(study_config_from_document(parse_key_value("methods = \n")), config_error);
}

TEST_CASE("shipped study config loads") {
  const auto c = study_config_from_document(
      read_key_value_file(std::string(SWITCHADJ_CONFIG_DIR) + "/study_scenario1.cfg"));
  CHECK(c.methods == default_methods());
  CHECK(c.replications == 500);
}
