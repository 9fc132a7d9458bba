#pragma once

#include <string>
#include <vector>

#include "subdiff/forward.hpp"
#include "subdiff/frequency.hpp"

namespace subdiff {

/// 17 significant digits, enough for exact binary round trip.
std::string fmt17(double v);

void write_text(const std::string& path, const std::string& content);

/// Comma-separated with a header row.
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Long format: t, mode_index, coefficient.
void write_solution_csv(const std::string& path, const ForwardSolution& sol);

/// Long format: t, boundary_point_id, value.
void write_trace_csv(const std::string& path, const TraceData& trace);

}  // namespace subdiff
