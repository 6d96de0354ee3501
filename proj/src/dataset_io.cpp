#include "switchadj/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "switchadj/config.hpp"
#include "switchadj/errors.hpp"

namespace switchadj {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

int parse_flag(const std::string& text, std::string_view column, const std::string& where) {
  if (text == "0") return 0;
  if (text == "1") return 1;
  throw config_error(fmt::format("{}: column '{}' must be 0 or 1, got '{}'", where, column, text));
}

}  // namespace

void write_dataset_csv(std::ostream& out, const trial_dataset& data, bool omit_oracle_columns) {
  const bool oracle = data.has_oracle_columns && !omit_oracle_columns;
  fmt::print(out, "{}\n", oracle ? kDatasetHeader : kAnalysisHeader);
  for (const auto& r : data.subjects) {
    if (oracle) {
      fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.id, to_string(r.source), r.arm,
                 r.badprog, r.u, r.ttp_exact, r.ttp, r.ttp_status, r.pps, r.pps_status, r.os_observed,
                 r.os_observed_status, r.os_noswitch, r.os_noswitch_status, r.switched, r.end_date);
    } else {
      fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.id, to_string(r.source), r.arm, r.badprog,
                 r.ttp_exact, r.ttp, r.ttp_status, r.pps, r.pps_status, r.os_observed, r.os_observed_status,
                 r.switched, r.end_date);
    }
  }
}

void write_dataset_csv(const std::filesystem::path& path, const trial_dataset& data, bool omit_oracle_columns) {
  std::ofstream out(path);
  if (!out) throw io_error(fmt::format("cannot open '{}' for writing", path.string()));
  write_dataset_csv(out, data, omit_oracle_columns);
  if (!out) throw io_error(fmt::format("write to '{}' failed", path.string()));
}

trial_dataset read_dataset_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw config_error(fmt::format("{}: empty dataset file", origin));
  if (!line.empty() && line.back() == '\r') line.pop_back();
  trial_dataset data;
  if (line == kDatasetHeader) {
    data.has_oracle_columns = true;
  } else if (line == kAnalysisHeader) {
    data.has_oracle_columns = false;
  } else {
    throw config_error(fmt::format("{}: unexpected header '{}'", origin, line));
  }
  const std::size_t width = data.has_oracle_columns ? 16 : 13;

  int line_no = 1;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = fmt::format("{}:{}", origin, line_no);
    const auto c = split_row(line);
    if (c.size() != width) {
      throw config_error(fmt::format("{}: expected {} fields, found {}", where, width, c.size()));
    }
    subject_record r;
    std::size_t k = 0;
    r.id = static_cast<int>(parse_integer(c[k++], "id"));
    r.source = parse_source(c[k++]);
    r.arm = parse_flag(c[k++], "arm", where);
    r.badprog = parse_flag(c[k++], "badprog", where);
    if (data.has_oracle_columns) r.u = parse_flag(c[k++], "u", where);
    r.ttp_exact = parse_double(c[k++], "ttp_exact");
    r.ttp = parse_double(c[k++], "ttp");
    r.ttp_status = parse_flag(c[k++], "ttp_status", where);
    r.pps = parse_double(c[k++], "pps");
    r.pps_status = parse_flag(c[k++], "pps_status", where);
    r.os_observed = parse_double(c[k++], "os_observed");
    r.os_observed_status = parse_flag(c[k++], "os_observed_status", where);
    if (data.has_oracle_columns) {
      r.os_noswitch = parse_double(c[k++], "os_noswitch");
      r.os_noswitch_status = parse_flag(c[k++], "os_noswitch_status", where);
    }
    r.switched = parse_flag(c[k++], "switch", where);
    r.end_date = parse_double(c[k++], "enddate");
    r.ttp_exact_status = r.ttp_exact < r.end_date ? 1 : 0;

    if (r.pps < 0.0 || !(r.os_observed > 0.0) || !(r.ttp > 0.0) || !(r.end_date > 0.0)) {
      throw config_error(fmt::format("{}: times out of range", where));
    }
    if (r.source == source_kind::external && (r.arm != 0 || r.switched != 0)) {
      throw config_error(fmt::format("{}: external subjects must have arm 0 and switch 0", where));
    }
    if (r.switched && r.arm != 0) throw config_error(fmt::format("{}: only control subjects may switch", where));
    if (first) {
      data.source = r.source;
      data.end_date = r.end_date;
      first = false;
    } else if (r.source != data.source) {
      throw config_error(fmt::format("{}: a dataset file holds one source only", where));
    }
    data.end_date = std::max(data.end_date, r.end_date);
    data.subjects.push_back(r);
  }
  return data;
}

trial_dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error(fmt::format("cannot open dataset '{}'", path.string()));
  return read_dataset_csv(in, path.string());
}

}  // namespace switchadj
