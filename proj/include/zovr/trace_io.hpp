#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "zovr/core.hpp"

namespace zovr {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// Columns: epoch,iter,szo_count,f_value,grad_norm_sq,flag. grad_norm_sq is
// empty when unavailable; flag is 1 on the last record of a truncated run.
// LF line endings; wall times are not serialized.
void write_trace_csv(const Trace& t, std::ostream& os);
void write_trace_csv(const Trace& t, const std::filesystem::path& path);

Trace read_trace_csv(const std::filesystem::path& path);

}  // namespace zovr
