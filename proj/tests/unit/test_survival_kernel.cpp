#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "switchadj/errors.hpp"
#include "switchadj/survival_kernel.hpp"

using namespace switchadj;

namespace {

std::vector<survival_observation> events(std::initializer_list<double> times) {
  std::vector<survival_observation> out;
  for (double t : times) out.push_back({t, 1, 1.0});
  return out;
}

void check_same_curve(const survival_curve& a, const survival_curve& b) {
  REQUIRE(a.times == b.times);
  CHECK(a.survival == b.survival);
  CHECK(a.at_risk == b.at_risk);
  CHECK(a.events == b.events);
  CHECK(a.max_followup == b.max_followup);
}

}  // namespace

TEST_CASE("uncensored KM is the empirical survival function") {
  const auto curve = km_estimate(events({100, 200, 300}));
  REQUIRE(curve.times == std::vector<double>{100, 200, 300});
  CHECK(curve.survival[0] == doctest::Approx(2.0 / 3.0));
  CHECK(curve.survival[1] == doctest::Approx(1.0 / 3.0));
  CHECK(curve.survival[2] == 0.0);
  CHECK(curve.at(99.9) == 1.0);
  CHECK(curve.at(100.0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("single censoring leaves the curve at one") {
  const std::vector<survival_observation> obs{{50, 0, 1.0}};
  const auto curve = km_estimate(obs);
  CHECK(curve.times.empty());
  CHECK(curve.at(1000) == 1.0);
  CHECK(curve.max_followup == 50);
}

TEST_CASE("weight two equals a duplicated row") {
  const std::vector<survival_observation> weighted{{10, 1, 2.0}, {20, 0, 1.0}, {30, 1, 1.0}};
  const std::vector<survival_observation> replicated{{10, 1, 1.0}, {10, 1, 1.0}, {20, 0, 1.0}, {30, 1, 1.0}};
  check_same_curve(km_estimate(weighted), km_estimate(replicated));
}

TEST_CASE("integer weights equal row replication on random data") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> time(1.0, 500.0);
  std::uniform_int_distribution<int> weight(1, 4), status(0, 1), tie(0, 3);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<survival_observation> w, rep;
    for (int i = 0; i < 40; ++i) {
      // Coarse rounding forces plenty of ties.
      const double t = tie(gen) == 0 ? std::round(time(gen) / 50.0) * 50.0 + 50.0 : time(gen);
      const int k = weight(gen);
      const int s = status(gen);
      w.push_back({t, s, static_cast<double>(k)});
      for (int j = 0; j < k; ++j) rep.push_back({t, s, 1.0});
    }
    check_same_curve(km_estimate(w), km_estimate(rep));
  }
}

TEST_CASE("KM is invariant to row permutation") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> time(1.0, 100.0);
  std::vector<survival_observation> obs;
  for (int i = 0; i < 60; ++i) obs.push_back({std::round(time(gen)), static_cast<int>(i % 3 != 0), 1.0 + (i % 2)});
  const auto reference = km_estimate(obs);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(obs.begin(), obs.end(), gen);
    check_same_curve(km_estimate(obs), reference);
  }
}

TEST_CASE("events precede censorings at tied times") {
  // With events first the censored row stays in the risk set: S = 1 - 1/2.
  const std::vector<survival_observation> obs{{10, 0, 1.0}, {10, 1, 1.0}};
  const auto curve = km_estimate(obs);
  REQUIRE(curve.times.size() == 1);
  CHECK(curve.at_risk[0] == 2.0);
  CHECK(curve.survival[0] == 0.5);
}

TEST_CASE("zero-weight rows are dropped") {
  const std::vector<survival_observation> with_zero{{5, 1, 0.0}, {10, 1, 1.0}, {20, 1, 1.0}};
  check_same_curve(km_estimate(with_zero), km_estimate(events({10, 20})));
}

TEST_CASE("KM input errors") {
  CHECK_THROWS_AS(km_estimate(std::vector<survival_observation>{}), config_error);
  CHECK_THROWS_AS(km_estimate(std::vector<survival_observation>{{10, 1, 0.0}}), config_error);
  CHECK_THROWS_AS(km_estimate(std::vector<survival_observation>{{0.0, 1, 1.0}}), config_error);
  CHECK_THROWS_AS(km_estimate(std::vector<survival_observation>{{1.0, 2, 1.0}}), config_error);
}

TEST_CASE("RMST examples") {
  const rmst_policy km{rmst_mode::km_only, beyond_followup::error};

  SUBCASE("everyone survives past t*") {
    const std::vector<survival_observation> obs{{500, 0, 1.0}, {600, 0, 1.0}};
    CHECK(rmst(km_estimate(obs), 300, km) == 300.0);
  }
  SUBCASE("mean of truncated times") {
    CHECK(rmst(km_estimate(events({100, 200, 300})), 250, km) == doctest::Approx(550.0 / 3.0));
  }
  SUBCASE("curve ending in censoring needs extrapolation") {
    const std::vector<survival_observation> obs{{50, 0, 1.0}};
    CHECK_THROWS_AS(rmst(km_estimate(obs), 100, km), extrapolation_required_error);
    CHECK(rmst(km_estimate(obs), 100, {rmst_mode::km_only, beyond_followup::extend}) == 100.0);
  }
  SUBCASE("a curve that reaches zero needs no extrapolation") {
    CHECK(rmst(km_estimate(events({10, 20})), 1000, km) == doctest::Approx(15.0));
  }
  SUBCASE("hybrid without a tail fit errors only when extension is needed") {
    const std::vector<survival_observation> obs{{50, 0, 1.0}, {20, 1, 1.0}};
    const rmst_policy hybrid{rmst_mode::hybrid, beyond_followup::extend};
    CHECK_THROWS_AS(rmst(km_estimate(obs), 100, hybrid), extrapolation_required_error);
    CHECK(rmst(km_estimate(obs), 40, hybrid) == doctest::Approx(20 + 0.5 * 20));
  }
}

TEST_CASE("truncated mean") {
  CHECK(truncated_mean(std::vector<double>{100, 200, 300}, 250) == doctest::Approx(183.3333333333));
  CHECK(truncated_mean(std::vector<double>{10}, 5) == 5.0);
  CHECK_THROWS_AS(truncated_mean(std::vector<double>{}, 5), config_error);
}

TEST_CASE("km-only RMST equals the truncated mean on uncensored data") {
  std::mt19937_64 gen(2024);
  std::exponential_distribution<double> draw(1.0 / 300.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> times;
    std::vector<survival_observation> obs;
    for (int i = 0; i < 200; ++i) {
      const double t = draw(gen) + 1e-3;
      times.push_back(t);
      obs.push_back({t, 1, 1.0});
    }
    for (double t_star : {50.0, 250.0, 5000.0}) {
      const double a = rmst(km_estimate(obs), t_star, {rmst_mode::km_only, beyond_followup::error});
      const double b = truncated_mean(times, t_star);
      CHECK(std::abs(a - b) <= 1e-9 * b);
    }
  }
}

TEST_CASE("RMST lies in [0, t*] for every policy") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> time(1.0, 400.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<survival_observation> obs;
    for (int i = 0; i < 30; ++i) obs.push_back({time(gen), static_cast<int>(gen() % 2), 1.0});
    obs.push_back({100.0, 1, 1.0});
    for (auto mode : {rmst_mode::km_only, rmst_mode::weibull, rmst_mode::hybrid}) {
      for (double t_star : {10.0, 300.0, 2000.0}) {
        const double v = sample_rmst(obs, t_star, {mode, beyond_followup::extend});
        CHECK(v >= 0.0);
        CHECK(v <= t_star + 1e-9);
      }
    }
  }
}

TEST_CASE("hybrid tail is continuous at the junction and follows the Weibull shape") {
  // Exponential tail: intercept log(100), scale 1 -> S(t) = exp(-t / 100).
  aft_fit tail;
  tail.intercept = std::log(100.0);
  tail.scale = 1.0;
  const std::vector<survival_observation> obs{{10, 1, 1.0}, {40, 0, 1.0}};
  const auto curve = km_estimate(obs);  // S = 0.5 from t = 10, follow-up ends at 40
  const double got = rmst(curve, 200, {rmst_mode::hybrid, beyond_followup::extend}, &tail);
  // KM part: 10 + 0.5 * 30; tail: 0.5 * int_40^200 exp(-(t - 40) / 100) dt
  const double expected = 10 + 15 + 0.5 * 100 * (1 - std::exp(-160.0 / 100.0));
  CHECK(got == doctest::Approx(expected).epsilon(1e-7));

  const double full = rmst(curve, 200, {rmst_mode::weibull, beyond_followup::extend}, &tail);
  CHECK(full == doctest::Approx(100 * (1 - std::exp(-2.0))).epsilon(1e-7));
}
