#include "carol/harness/results.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "carol/error.hpp"

namespace carol::harness {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw DataError("cannot format number");
  return std::string(buf, end);
}

namespace {

double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw DataError(where + ": bad number '" + std::string(s) + "'");
  return v;
}

long parse_long(std::string_view s, const std::string& where) {
  long v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) throw DataError(where + ": bad integer '" + std::string(s) + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

}  // namespace

std::string render_table(const Table& t) {
  std::string out(kResultsHeader);
  out += '\n';
  out += join(t.columns);
  out += '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw DataError("row width does not match the column count");
    out += join(row);
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, std::string_view contents) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + p.parent_path().string() + "': " + ec.message());
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed on '" + tmp + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_table(const std::string& path, const Table& t) { write_file(path, render_table(t)); }

Table read_table(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader)
    throw DataError(path + ": missing '" + std::string(kResultsHeader) + "' header");
  Table t;
  if (!std::getline(in, line)) throw DataError(path + ": missing column line");
  t.columns = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.columns.size()) throw DataError(path + ": ragged row '" + line + "'");
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table curve_table(const LearningCurve& curve) {
  Table t;
  t.columns = split(std::string(kCurveColumns));
  for (const CurvePoint& p : curve)
    t.rows.push_back({std::to_string(p.iteration), std::to_string(p.episodes_seen), format_double(p.mean_return),
                      format_double(p.std_return)});
  return t;
}

void write_curve_csv(const std::string& path, const LearningCurve& curve) { write_table(path, curve_table(curve)); }

LearningCurve read_curve_csv(const std::string& path) {
  const Table t = read_table(path);
  if (join(t.columns) != kCurveColumns) throw DataError(path + ": unexpected columns");
  LearningCurve curve;
  for (const auto& row : t.rows)
    curve.push_back(CurvePoint{static_cast<int>(parse_long(row[0], path)), parse_long(row[1], path),
                               parse_double(row[2], path), parse_double(row[3], path)});
  return curve;
}

}  // namespace carol::harness
