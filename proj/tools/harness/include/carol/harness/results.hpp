#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "carol/adaptation.hpp"

namespace carol::harness {

inline constexpr std::string_view kResultsHeader = "# carol-kit results v1";
inline constexpr std::string_view kCurveColumns = "iteration,episodes_seen,mean_return,std_return";

/// Shortest decimal that round-trips, so files are byte-stable across runs.
std::string format_double(double v);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Header comment line, column line, then one line per row.
std::string render_table(const Table& t);
void write_table(const std::string& path, const Table& t);
/// Throws DataError on a missing header comment or ragged rows.
Table read_table(const std::string& path);

Table curve_table(const LearningCurve& curve);
void write_curve_csv(const std::string& path, const LearningCurve& curve);
LearningCurve read_curve_csv(const std::string& path);

/// Writes path atomically via a sibling temporary file.
void write_file(const std::string& path, std::string_view contents);
std::string read_file(const std::string& path);

}  // namespace carol::harness
