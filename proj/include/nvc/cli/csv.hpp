#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nvc/error.hpp"
#include "nvc/spectral.hpp"

namespace nvc::cli {

// Shortest round-trip text, so outputs are byte-stable across runs.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
  return std::string(buf, end);
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Quotes a field when it contains a separator.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline double parse_cell(std::string_view cell, std::size_t row, std::size_t column) {
  if (cell.empty()) throw ParseError("empty cell", row, column);
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec == std::errc::result_out_of_range) throw ParseError("value out of range '" + std::string(cell) + "'", row, column);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw ParseError("not a number '" + std::string(cell) + "'", row, column);
  if (!std::isfinite(v)) throw ParseError("non-finite value '" + std::string(cell) + "'", row, column);
  return v;
}

// Header row of channel labels, then one row of samples per time point.
// Rows and columns in errors are 1-based; the header is row 1.
inline TimeSeriesMatrix read_csv(std::istream& in, double fs) {
  std::string line;
  std::size_t row = 0;
  std::vector<std::string> labels;
  while (std::getline(in, line)) {
    ++row;
    if (row == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    for (auto f : split_fields(line)) labels.emplace_back(f);
    break;
  }
  if (labels.empty()) throw DataError("csv: missing header row");
  std::set<std::string> seen;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    if (labels[c].empty()) throw ParseError("empty channel label", row, c + 1);
    if (!seen.insert(labels[c]).second) throw ParseError("duplicate channel label '" + labels[c] + "'", row, c + 1);
  }
  std::vector<std::vector<double>> chans(labels.size());
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != labels.size())
      throw ParseError("ragged row: expected " + std::to_string(labels.size()) + " fields, found " + std::to_string(fields.size()),
                       row, std::min(fields.size(), labels.size()) + 1);
    for (std::size_t c = 0; c < fields.size(); ++c) chans[c].push_back(parse_cell(fields[c], row, c + 1));
  }
  if (chans.front().empty()) throw DataError("csv: no sample rows");
  return {std::move(chans), fs, std::move(labels)};
}

inline TimeSeriesMatrix ingest_csv(const std::string& path, double fs) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in, fs);
}

inline void write_csv(std::ostream& out, const TimeSeriesMatrix& ts) {
  for (std::size_t c = 0; c < ts.channels(); ++c) out << (c ? "," : "") << csv_field(ts.labels()[c]);
  out << '\n';
  for (std::size_t t = 0; t < ts.samples(); ++t) {
    for (std::size_t c = 0; c < ts.channels(); ++c) out << (c ? "," : "") << format_double(ts(t, c));
    out << '\n';
  }
}

// Subject-by-feature table: first column names the subject, the rest are
// numeric features sharing the header's column names.
struct FeatureTable {
  std::vector<std::string> features;
  std::vector<std::string> subjects;
  std::vector<std::vector<double>> values;  // values[subject][feature]

  std::vector<double> column(std::size_t f) const {
    std::vector<double> out;
    for (const auto& row : values) out.push_back(row.at(f));
    return out;
  }
};

inline FeatureTable read_feature_table(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  FeatureTable t;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() < 2) throw ParseError("feature table needs a subject column and at least one feature", row, 1);
    for (std::size_t c = 1; c < fields.size(); ++c) t.features.emplace_back(fields[c]);
    break;
  }
  if (t.features.empty()) throw DataError("feature table: missing header row");
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != t.features.size() + 1)
      throw ParseError("ragged row: expected " + std::to_string(t.features.size() + 1) + " fields", row,
                       std::min(fields.size(), t.features.size() + 1) + 1);
    t.subjects.emplace_back(fields[0]);
    std::vector<double> vals;
    for (std::size_t c = 1; c < fields.size(); ++c)
      vals.push_back(fields[c] == "NA" ? std::numeric_limits<double>::quiet_NaN() : parse_cell(fields[c], row, c + 1));
    t.values.push_back(std::move(vals));
  }
  return t;
}

inline FeatureTable read_feature_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_feature_table(in);
}

}  // namespace nvc::cli
