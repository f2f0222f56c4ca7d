#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metricdim/amplifier.hpp"
#include "metricdim/estimators.hpp"
#include "metricdim/io.hpp"
#include "metricdim/partition.hpp"
#include "metricdim/sparse.hpp"

namespace metricdim {

inline Json to_json(const DimEstimate& e) {
  return Json{{"value", e.value}, {"method", e.method}, {"window", e.window}, {"spread", e.spread}};
}

// ---- Certificates: {s, n, level, classes: [[[i1..in], ...], ...], projections, delta} ----

inline Json certificate_to_json(const SparseCertificate& cert) {
  Json classes = Json::array();
  for (const auto& cls : cert.classes) classes.push_back(cover_to_json(cls).at("indices"));
  return Json{{"s", cert.s()},
              {"n", cert.dim},
              {"level", cert.level},
              {"classes", std::move(classes)},
              {"projections", cert.projections},
              {"delta", cert.delta}};
}

/// Structural parse only; membership and fiber bounds are checked by
/// validate_certificate against a cover.
inline SparseCertificate certificate_from_json(const Json& j) {
  auto field = [&](const char* key) -> const Json& {
    if (!j.is_object() || !j.contains(key)) throw ArgumentError(std::string("certificate.") + key + ": missing field");
    return j.at(key);
  };
  try {
    SparseCertificate cert;
    cert.level = field("level").get<int>();
    cert.dim = field("n").get<std::size_t>();
    const auto s = field("s").get<std::size_t>();
    for (const auto& cls : field("classes")) {
      cert.classes.push_back(cover_from_json(Json{{"n", cert.dim}, {"k", cert.level}, {"indices", cls}}));
    }
    cert.projections = field("projections").get<std::vector<std::size_t>>();
    cert.delta = field("delta").get<std::vector<std::uint64_t>>();
    if (cert.classes.size() != s || cert.projections.size() != s || cert.delta.size() != s) {
      throw ArgumentError("certificate: s disagrees with the lengths of classes, projections and delta");
    }
    return cert;
  } catch (const Json::exception& e) {
    throw ArgumentError(std::string("certificate: malformed field (") + e.what() + ")");
  }
}

inline Json to_json(const SparsenessProfile& profile) {
  Json rows = Json::array();
  for (const auto& e : profile.entries) rows.push_back({{"k", e.level}, {"s", e.s}, {"delta", e.delta}, {"eps", e.eps}});
  return rows;
}

inline Json to_json(const PlanarClassification& cl) {
  Json classes = Json::array();
  for (std::size_t c = 0; c < cl.classes.size(); ++c) {
    const auto& pc = cl.classes[c];
    classes.push_back({{"name", "C" + std::to_string(c + 1)},
                       {"size", pc.cells.size()},
                       {"drop", pc.drop},
                       {"delta", pc.delta},
                       {"eps", pc.eps},
                       {"sparse_witnessed", pc.sparse_witnessed()},
                       {"indices", cover_to_json(pc.cells).at("indices")}});
  }
  return Json{{"level", cl.level}, {"run_threshold", cl.run_threshold}, {"classes", std::move(classes)}};
}

inline Json to_json(const UniformPartition& p) {
  Json parts = Json::array();
  for (const auto& d : p.parts) {
    const double width = std::ldexp(1.0, -d.level);
    parts.push_back({{"level", d.level}, {"index", d.index}, {"interval", {d.index * width, (d.index + 1) * width}}});
  }
  return Json{{"parts", std::move(parts)}, {"minimal", p.minimal}};
}

inline Json to_json(const ConeGap& g) {
  return Json{{"axis_angle", g.axis_angle},
              {"half_width", g.half_width},
              {"lower_constant_sup", g.lower_constant},
              {"lower_constant_euclidean", g.lower_constant_euclidean}};
}

inline Json to_json(const AmplifierTrace& t) {
  Json iterations = Json::array();
  for (const auto& it : t.iterations) {
    Json row{{"size", it.size},
             {"exponent", it.exponent},
             {"exponent_spread", it.exponent_spread},
             {"dense", it.dense},
             {"gap", it.gap ? to_json(*it.gap) : Json(nullptr)}};
    iterations.push_back(std::move(row));
  }
  return Json{{"verdict", to_string(t.verdict)},
              {"final_map_arity", t.final_map_arity},
              {"iterations", std::move(iterations)}};
}

}  // namespace metricdim
