#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "switchadj/trial_sim.hpp"

namespace switchadj {

/// Flat `key = value` document. `#` starts a comment; blank lines ignored.
/// Keys keep file order; a repeated key is an error.
struct key_value_document {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string origin;
};

key_value_document parse_key_value(std::string_view text, std::string origin = "<string>");
key_value_document read_key_value_file(const std::filesystem::path& path);

double parse_double(const std::string& text, std::string_view key);
long long parse_integer(const std::string& text, std::string_view key);
std::uint64_t parse_u64(const std::string& text, std::string_view key);
std::vector<std::string> split_list(const std::string& text);

/// Sets one ScenarioSpec field by name. Returns false when `key` is not a
/// scenario field; throws config_error on a malformed value.
bool apply_scenario_field(scenario_spec& spec, const std::string& key, const std::string& value);

/// Every scenario field name, in serialization order.
const std::vector<std::string>& scenario_field_names();

/// Builds a spec from `base` plus the document; unknown keys are rejected.
scenario_spec scenario_from_document(const key_value_document& doc, scenario_spec base = {});

/// Serializes every field so that scenario_from_document round-trips exactly.
std::string to_key_value(const scenario_spec& spec);

}  // namespace switchadj
