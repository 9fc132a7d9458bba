#include "subdiff/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace subdiff {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::runtime_error("csv row width mismatch: " + path);
    for (size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_solution_csv(const std::string& path, const ForwardSolution& sol) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<size_t>(sol.grid.size()) * sol.basis->size());
  for (int i = 0; i < sol.grid.size(); ++i)
    for (int k = 0; k < sol.basis->size(); ++k)
      rows.push_back({fmt17(sol.grid.nodes[i]), std::to_string(k),
                      fmt17(sol.coeff(i, k))});
  write_csv(path, {"t", "mode_index", "coefficient"}, rows);
}

void write_trace_csv(const std::string& path, const TraceData& trace) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<size_t>(trace.times.size()) * trace.values.cols());
  for (int i = 0; i < trace.times.size(); ++i)
    for (int q = 0; q < trace.values.cols(); ++q)
      rows.push_back({fmt17(trace.times[i]), std::to_string(q),
                      fmt17(trace.values(i, q))});
  write_csv(path, {"t", "boundary_point_id", "value"}, rows);
}

}  // namespace subdiff
