/// \file csv.hpp
/// CSV emission: comma-separated, '.' decimal, 17 significant digits, header
/// row mandatory.
#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "zms/asymptotics.hpp"
#include "zms/util.hpp"

namespace zms {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_scan_csv(const ScanReport& rep, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw numerical_error("write_scan_csv: cannot open " + path);
  for (std::size_t i = 0; i < rep.columns.size(); ++i)
    std::fprintf(fp, "%s%s", rep.columns[i].c_str(),
                 i + 1 < rep.columns.size() ? "," : "\n");
  for (const auto& row : rep.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      std::fprintf(fp, "%.17g%s", row[i], i + 1 < row.size() ? "," : "\n");
  }
  std::fclose(fp);
}

inline void write_table_csv(const std::vector<std::string>& columns,
                            const std::vector<std::vector<std::string>>& rows,
                            const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw numerical_error("write_table_csv: cannot open " + path);
  for (std::size_t i = 0; i < columns.size(); ++i)
    std::fprintf(fp, "%s%s", columns[i].c_str(),
                 i + 1 < columns.size() ? "," : "\n");
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      std::fprintf(fp, "%s%s", row[i].c_str(), i + 1 < row.size() ? "," : "\n");
  }
  std::fclose(fp);
}

}  // namespace zms
