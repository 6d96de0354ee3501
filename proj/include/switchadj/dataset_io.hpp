#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "switchadj/trial_sim.hpp"

namespace switchadj {

inline constexpr std::string_view kDatasetHeader =
    "id,source,arm,badprog,u,ttp_exact,ttp,ttp_status,pps,pps_status,os_observed,"
    "os_observed_status,os_noswitch,os_noswitch_status,switch,enddate";

/// Header without the oracle-only columns (u, os_noswitch, os_noswitch_status).
inline constexpr std::string_view kAnalysisHeader =
    "id,source,arm,badprog,ttp_exact,ttp,ttp_status,pps,pps_status,os_observed,"
    "os_observed_status,switch,enddate";

/// Times are written in shortest round-trip form, so reading back is exact.
void write_dataset_csv(std::ostream& out, const trial_dataset& data, bool omit_oracle_columns = false);
void write_dataset_csv(const std::filesystem::path& path, const trial_dataset& data,
                       bool omit_oracle_columns = false);

/// Accepts either header; throws config_error on any schema violation.
trial_dataset read_dataset_csv(std::istream& in, const std::string& origin = "<stream>");
trial_dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace switchadj
