#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "switchadj/config.hpp"
#include "switchadj/dataset_io.hpp"
#include "switchadj/errors.hpp"
#include "switchadj/trial_sim.hpp"

using namespace switchadj;

TEST_CASE("shipped scenario files match the presets") {
  for (int k = 1; k <= 8; ++k) {
    const auto path = std::filesystem::path(SWITCHADJ_CONFIG_DIR) / fmt::format("scenario{}.cfg", k);
    const scenario_spec from_file = scenario_from_document(read_key_value_file(path));
    CHECK(to_key_value(from_file) == to_key_value(scenario_preset(k)));
  }
}

TEST_CASE("key-value parsing") {
  const auto doc = parse_key_value("# comment\n\n a = 1 \nb=two # trailing\n");
  REQUIRE(doc.entries.size() == 2);
  CHECK(doc.entries[0] == std::pair<std::string, std::string>{"a", "1"});
  CHECK(doc.entries[1] == std::pair<std::string, std::string>{"b", "two"});
  CHECK_THROWS_AS(parse_key_value("a = 1\na = 2\n"), config_error);
  CHECK_THROWS_AS(parse_key_value("no equals sign\n"), config_error);
  CHECK_THROWS_AS(read_key_value_file("/nonexistent/path.cfg"), io_error);
}

TEST_CASE("number parsing") {
  CHECK(parse_double("1.5e3", "k") == 1500.0);
  CHECK(parse_integer("-12", "k") == -12);
  CHECK(parse_u64("18446744073709551615", "k") == 18446744073709551615ull);
  CHECK_THROWS_AS(parse_double("1.5x", "k"), config_error);
  CHECK_THROWS_AS(parse_integer("3.0", "k"), config_error);
  CHECK_THROWS_AS(parse_u64("-1", "k"), config_error);
  CHECK(split_list("a, b ,c") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("scenario serialization round-trips") {
  scenario_spec spec = scenario_preset(7);
  spec.cond = condition::C;
  spec.omega = 1.2345678901234567;
  spec.lambda2 = 0.1 + 0.2;
  const scenario_spec back = scenario_from_document(parse_key_value(to_key_value(spec)));
  CHECK(to_key_value(back) == to_key_value(spec));
  CHECK(back.omega == spec.omega);
  CHECK(back.lambda2 == spec.lambda2);
  CHECK(back.cond == condition::C);
  CHECK(scenario_field_names().size() == 25);
}

TEST_CASE("unknown and malformed scenario keys are rejected") {
  CHECK_THROWS_AS(scenario_from_document(parse_key_value("omeg = 1.1\n")), config_error);
  CHECK_THROWS_AS(scenario_from_document(parse_key_value("omega = fast\n")), config_error);
  CHECK_THROWS_AS(scenario_from_document(parse_key_value("condition = Z\n")), config_error);
  scenario_spec spec;
  CHECK_FALSE(apply_scenario_field(spec, "replications", "5"));
  CHECK(apply_scenario_field(spec, "omega", "1.3"));
  CHECK(spec.omega == 1.3);
}

TEST_CASE("dataset CSV round-trips exactly") {
  scenario_spec spec = scenario_preset(5);
  spec.rct_size = 60;
  const auto rct = simulate_rct(spec, 8);
  std::stringstream buffer;
  write_dataset_csv(buffer, rct);
  std::string header;
  std::getline(std::stringstream(buffer.str()), header);
  CHECK(header == kDatasetHeader);

  const auto back = read_dataset_csv(buffer);
  REQUIRE(back.subjects.size() == rct.subjects.size());
  CHECK(back.source == source_kind::rct);
  CHECK(back.has_oracle_columns);
  for (std::size_t i = 0; i < rct.subjects.size(); ++i) {
    const auto& a = rct.subjects[i];
    const auto& b = back.subjects[i];
    CHECK(a.id == b.id);
    CHECK(a.arm == b.arm);
    CHECK(a.badprog == b.badprog);
    CHECK(a.u == b.u);
    CHECK(a.ttp_exact == b.ttp_exact);
    CHECK(a.ttp_exact_status == b.ttp_exact_status);
    CHECK(a.ttp == b.ttp);
    CHECK(a.ttp_status == b.ttp_status);
    CHECK(a.pps == b.pps);
    CHECK(a.pps_status == b.pps_status);
    CHECK(a.os_observed == b.os_observed);
    CHECK(a.os_observed_status == b.os_observed_status);
    CHECK(a.os_noswitch == b.os_noswitch);
    CHECK(a.os_noswitch_status == b.os_noswitch_status);
    CHECK(a.switched == b.switched);
    CHECK(a.end_date == b.end_date);
  }
}

TEST_CASE("analysis-only CSV omits the oracle columns") {
  scenario_spec spec;
  spec.external_size = 10;
  std::stringstream buffer;
  write_dataset_csv(buffer, simulate_external(spec, 1), true);
  const auto back = read_dataset_csv(buffer);
  CHECK_FALSE(back.has_oracle_columns);
  CHECK(back.source == source_kind::external);
  CHECK(back.subjects.size() == 10);
}

TEST_CASE("CSV schema violations") {
  auto read = [](const std::string& text) {
    std::stringstream in(text);
    return read_dataset_csv(in);
  };
  const std::string header(kDatasetHeader);
  CHECK_THROWS_AS(read(""), config_error);
  CHECK_THROWS_AS(read("id,arm\n1,0\n"), config_error);
  CHECK_THROWS_AS(read(header + "\n1,rct,0,0\n"), config_error);
  CHECK_THROWS_AS(read(header + "\n1,rct,0,2,0,10,21,1,5,1,26,1,26,1,0,5000\n"), config_error);
  CHECK_THROWS_AS(read(header + "\n1,external,1,0,0,10,21,1,5,1,26,1,26,1,0,5000\n"), config_error);
  CHECK_THROWS_AS(read(header + "\n1,rct,0,0,0,10,21,1,5,1,26,1,26,1,0,5000\n"
                                "2,external,0,0,0,10,21,1,5,1,26,1,26,1,0,5000\n"),
                  config_error);
  CHECK_NOTHROW(read(header + "\n1,rct,0,0,0,10,21,1,5,1,26,1,26,1,0,5000\n"));
  CHECK_THROWS_AS(read_dataset_csv(std::filesystem::path("/nonexistent/rct.csv")), io_error);
}
