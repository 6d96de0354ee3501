#include "switchadj/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/core.h>

#include "switchadj/errors.hpp"

namespace switchadj {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double v) { return fmt::format("{}", v); }

struct scenario_field {
  std::string name;
  std::function<void(scenario_spec&, const std::string&)> set;
  std::function<std::string(const scenario_spec&)> get;
};

template <class T>
scenario_field numeric(std::string name, T scenario_spec::*member) {
  return {name,
          [name, member](scenario_spec& s, const std::string& v) {
            if constexpr (std::is_same_v<T, int>) {
              s.*member = static_cast<int>(parse_integer(v, name));
            } else {
              s.*member = parse_double(v, name);
            }
          },
          [member](const scenario_spec& s) {
            if constexpr (std::is_same_v<T, int>) {
              return std::to_string(s.*member);
            } else {
              return format_double(s.*member);
            }
          }};
}

const std::vector<scenario_field>& fields() {
  static const std::vector<scenario_field> table = {
      numeric("pmix", &scenario_spec::pmix),
      numeric("lambda1", &scenario_spec::lambda1),
      numeric("lambda2", &scenario_spec::lambda2),
      numeric("gamma1", &scenario_spec::gamma1),
      numeric("gamma2", &scenario_spec::gamma2),
      numeric("time_scale", &scenario_spec::time_scale),
      numeric("delta1", &scenario_spec::delta1),
      numeric("delta2", &scenario_spec::delta2),
      numeric("delta3", &scenario_spec::delta3),
      numeric("omega", &scenario_spec::omega),
      {"switching", [](scenario_spec& s, const std::string& v) { s.switching = parse_switching_level(v); },
       [](const scenario_spec& s) { return std::string(to_string(s.switching)); }},
      {"condition", [](scenario_spec& s, const std::string& v) { s.cond = parse_condition(v); },
       [](const scenario_spec& s) { return std::string(to_string(s.cond)); }},
      numeric("rct_size", &scenario_spec::rct_size),
      numeric("allocation_ratio", &scenario_spec::allocation_ratio),
      numeric("external_size", &scenario_spec::external_size),
      numeric("rct_badprog_prob", &scenario_spec::rct_badprog_prob),
      numeric("external_badprog_prob", &scenario_spec::external_badprog_prob),
      numeric("u_prob", &scenario_spec::u_prob),
      numeric("external_u_prob_b", &scenario_spec::external_u_prob_b),
      numeric("switch_u_reduction", &scenario_spec::switch_u_reduction),
      numeric("pfs_beta_a", &scenario_spec::pfs_beta_a),
      numeric("pfs_beta_b", &scenario_spec::pfs_beta_b),
      numeric("visit_interval", &scenario_spec::visit_interval),
      numeric("end_date", &scenario_spec::end_date),
      numeric("bracket_upper", &scenario_spec::bracket_upper),
  };
  return table;
}

}  // namespace

key_value_document parse_key_value(std::string_view text, std::string origin) {
  key_value_document doc;
  doc.origin = std::move(origin);
  std::map<std::string, int> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw config_error(fmt::format("{}:{}: expected 'key = value'", doc.origin, line_no));
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw config_error(fmt::format("{}:{}: empty key", doc.origin, line_no));
    if (seen.count(key)) {
      throw config_error(fmt::format("{}:{}: key '{}' repeats line {}", doc.origin, line_no, key, seen[key]));
    }
    seen[key] = line_no;
    doc.entries.emplace_back(std::move(key), std::move(value));
  }
  return doc;
}

key_value_document read_key_value_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error(fmt::format("cannot open config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_key_value(buffer.str(), path.string());
}

double parse_double(const std::string& text, std::string_view key) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw config_error(fmt::format("'{}': '{}' is not a number", key, text));
  }
  return v;
}

long long parse_integer(const std::string& text, std::string_view key) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw config_error(fmt::format("'{}': '{}' is not an integer", key, text));
  }
  return v;
}

std::uint64_t parse_u64(const std::string& text, std::string_view key) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw config_error(fmt::format("'{}': '{}' is not an unsigned integer", key, text));
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    std::string t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

bool apply_scenario_field(scenario_spec& spec, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.name == key) {
      f.set(spec, value);
      return true;
    }
  }
  return false;
}

const std::vector<std::string>& scenario_field_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& f : fields()) n.push_back(f.name);
    return n;
  }();
  return names;
}

scenario_spec scenario_from_document(const key_value_document& doc, scenario_spec base) {
  for (const auto& [key, value] : doc.entries) {
    if (!apply_scenario_field(base, key, value)) {
      throw config_error(fmt::format("{}: unknown scenario key '{}'", doc.origin, key));
    }
  }
  base.validate();
  return base;
}

std::string to_key_value(const scenario_spec& spec) {
  std::string out;
  for (const auto& f : fields()) out += fmt::format("{} = {}\n", f.name, f.get(spec));
  return out;
}

}  // namespace switchadj
