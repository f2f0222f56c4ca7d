#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "metricdim/dyadic.hpp"
#include "metricdim/errors.hpp"
#include "metricdim/point_set.hpp"
#include "metricdim/scaling.hpp"

namespace metricdim {

using Json = nlohmann::json;

inline double parse_real(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  if (first < last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw ArgumentError("not a real number: '" + std::string(text) + "'");
  return value;
}

// ---- PointSet CSV: header x1,...,xn then one point per row ----

inline void write_csv(std::ostream& os, const PointSet& ps) {
  for (std::size_t c = 0; c < ps.dim(); ++c) os << (c ? "," : "") << 'x' << (c + 1);
  os << '\n';
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto p = ps[i];
    for (std::size_t c = 0; c < p.size(); ++c) os << (c ? "," : "") << format_real(p[c]);
    os << '\n';
  }
}

inline PointSet read_csv(std::istream& is, Metric metric = {}, std::optional<int> trusted_level = std::nullopt) {
  std::string line;
  if (!std::getline(is, line)) throw ArgumentError("point CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::size_t dim = 0;
  {
    std::stringstream header(line);
    std::string field;
    while (std::getline(header, field, ',')) {
      if (field != "x" + std::to_string(dim + 1)) {
        throw ArgumentError("point CSV header must read x1,...,xn; found '" + field + "'");
      }
      ++dim;
    }
  }
  if (dim == 0) throw ArgumentError("point CSV header declares no coordinates");
  std::vector<double> coords;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string field;
    std::size_t seen = 0;
    while (std::getline(fields, field, ',')) {
      coords.push_back(parse_real(field));
      ++seen;
    }
    if (seen != dim) {
      throw ArgumentError("point CSV row " + std::to_string(row) + " has " + std::to_string(seen) +
                          " fields, expected " + std::to_string(dim));
    }
  }
  return PointSet(dim, std::move(coords), metric, trusted_level);
}

// ---- Cover JSON: {n, k, indices: [[v1,...,vn], ...]} ----

inline Json cover_to_json(const DyadicCover& cover) {
  Json indices = Json::array();
  for (std::size_t i = 0; i < cover.size(); ++i) {
    auto v = cover[i];
    indices.push_back(std::vector<Index>(v.begin(), v.end()));
  }
  return Json{{"n", cover.dim()}, {"k", cover.level()}, {"indices", std::move(indices)}};
}

inline DyadicCover cover_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("k") || !j.contains("indices")) {
    throw ArgumentError("cover JSON needs fields n, k and indices");
  }
  const auto n = j.at("n").get<std::size_t>();
  const auto k = j.at("k").get<int>();
  std::vector<Index> flat;
  for (const auto& tuple : j.at("indices")) {
    if (!tuple.is_array() || tuple.size() != n) throw ArgumentError("cover index tuple does not have n entries");
    for (const auto& v : tuple) flat.push_back(v.get<Index>());
  }
  return DyadicCover(k, n, std::move(flat));
}

// ---- ScalingCurve CSV: k,count ----

inline void write_curve_csv(std::ostream& os, const ScalingCurve& curve) {
  os << "k,count\n";
  for (const auto& e : curve.entries()) os << e.level << ',' << e.count << '\n';
}

inline Json curve_to_json(const ScalingCurve& curve) {
  Json rows = Json::array();
  for (const auto& e : curve.entries()) rows.push_back({e.level, e.count});
  return rows;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace metricdim
