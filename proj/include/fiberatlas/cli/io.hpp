#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fiberatlas/cloud.hpp"
#include "fiberatlas/error.hpp"

#ifndef FIBERATLAS_VERSION
#define FIBERATLAS_VERSION "0.1.0"
#endif

namespace fiberatlas::cli {

inline constexpr const char* kToolName = "fiberatlas";
inline constexpr const char* kVersion = FIBERATLAS_VERSION;

struct CsvCloud {
  std::vector<std::string> columns;
  PointCloud points;
};

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool parse_double(const std::string& text, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(text, &used);
    return used == text.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace detail

/// Point cloud from a CSV file: optional header row, one point per line. A
/// column named "residual" (as written by fiber-sample) is dropped.
inline CsvCloud read_point_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  CsvCloud out;
  std::string line;
  std::size_t lineno = 0;
  std::vector<bool> keep;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto fields = detail::split(line, ',');
    for (auto& f : fields) f = detail::trim(f);
    double probe = 0.0;
    if (keep.empty() && !detail::parse_double(fields[0], probe)) {
      for (const auto& f : fields) keep.push_back(f != "residual");
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (keep[i]) out.columns.push_back(fields[i]);
      }
      continue;
    }
    if (keep.empty()) {
      keep.assign(fields.size(), true);
      for (std::size_t i = 0; i < fields.size(); ++i) out.columns.push_back("c" + std::to_string(i));
    }
    if (fields.size() != keep.size()) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(keep.size()) + " fields");
    }
    Point p;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!keep[i]) continue;
      double v = 0.0;
      if (!detail::parse_double(fields[i], v)) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": '" + fields[i] + "' is not a number");
      }
      p.push_back(v);
    }
    out.points.push_back(std::move(p));
  }
  if (out.points.empty()) throw DegenerateCloud(path + " holds no points");
  return out;
}

inline void write_point_csv(std::ostream& os, const std::vector<std::string>& columns, const PointCloud& pts) {
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << '\n';
  os.precision(17);
  for (const auto& p : pts) {
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
    os << '\n';
  }
}

/// Writes through a stream callback into dir/name, creating dir.
template <class Writer>
void write_file(const std::filesystem::path& dir, const std::string& name, Writer&& writer) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) throw InvalidArgument("cannot write " + (dir / name).string());
  writer(os);
}

/// Shortest round-trip text of a parameter value, for file names.
inline std::string tag(double v) { return nlohmann::json(v).dump(); }

inline nlohmann::json error_json(const std::string& code, const std::string& message) {
  return {{"error", code}, {"message", message}};
}

}  // namespace fiberatlas::cli
