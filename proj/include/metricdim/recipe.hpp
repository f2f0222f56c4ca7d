#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metricdim/constructors.hpp"
#include "metricdim/errors.hpp"
#include "metricdim/io.hpp"
#include "metricdim/point_set.hpp"

namespace metricdim {

enum class RecipeKind { cantor, reciprocals, factorials, grid, product, rotated_product, affine_image, graph, set_union };

inline const char* to_string(RecipeKind kind) {
  switch (kind) {
    case RecipeKind::cantor: return "cantor";
    case RecipeKind::reciprocals: return "reciprocals";
    case RecipeKind::factorials: return "factorials";
    case RecipeKind::grid: return "grid";
    case RecipeKind::product: return "product";
    case RecipeKind::rotated_product: return "rotated_product";
    case RecipeKind::affine_image: return "affine_image";
    case RecipeKind::graph: return "graph";
    case RecipeKind::set_union: return "union";
  }
  return "?";
}

inline RecipeKind recipe_kind_from_string(const std::string& name) {
  for (auto kind : {RecipeKind::cantor, RecipeKind::reciprocals, RecipeKind::factorials, RecipeKind::grid,
                    RecipeKind::product, RecipeKind::rotated_product, RecipeKind::affine_image, RecipeKind::graph,
                    RecipeKind::set_union}) {
    if (name == to_string(kind)) return kind;
  }
  throw ArgumentError("recipe.kind: unknown kind '" + name + "'");
}

/// A seedless description of a witness set.
struct SetRecipe {
  RecipeKind kind = RecipeKind::cantor;
  double lambda = 1.0 / 3.0;     // cantor
  int depth = 0;                 // cantor
  std::int64_t count = 0;        // reciprocals, factorials, grid
  std::vector<SetRecipe> parts;  // product, rotated_product (2), affine_image (1), union (>= 1)
  Matrix matrix;                 // affine_image
  std::vector<double> offset;    // affine_image
  GraphTable table;              // graph
  std::optional<double> snowflake;

  static SetRecipe make_cantor(double lambda, int depth) {
    SetRecipe r;
    r.kind = RecipeKind::cantor;
    r.lambda = lambda;
    r.depth = depth;
    return r;
  }
  static SetRecipe make_counted(RecipeKind kind, std::int64_t count) {
    SetRecipe r;
    r.kind = kind;
    r.count = count;
    return r;
  }
  static SetRecipe make_binary(RecipeKind kind, SetRecipe a, SetRecipe b) {
    SetRecipe r;
    r.kind = kind;
    r.parts = {std::move(a), std::move(b)};
    return r;
  }
};

/// Reals in recipes may be JSON numbers or "p/q" strings.
inline double real_from_json(const Json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto text = j.get<std::string>();
    if (const auto slash = text.find('/'); slash != std::string::npos) {
      const double num = parse_real(text.substr(0, slash));
      const double den = parse_real(text.substr(slash + 1));
      if (den == 0.0) throw ArgumentError(field + ": zero denominator");
      return num / den;
    }
    return parse_real(text);
  }
  throw ArgumentError(field + ": expected a number or a \"p/q\" string");
}

namespace detail {

inline const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ArgumentError(where + "." + key + ": missing field");
  return j.at(key);
}

template <typename T>
T get_field(const Json& j, const char* key, const std::string& where) {
  try {
    return require(j, key, where).get<T>();
  } catch (const Json::exception&) {
    throw ArgumentError(where + "." + key + ": wrong type");
  }
}

}  // namespace detail

inline SetRecipe recipe_from_json(const Json& j, const std::string& where = "recipe") {
  SetRecipe r;
  r.kind = recipe_kind_from_string(detail::get_field<std::string>(j, "kind", where));
  switch (r.kind) {
    case RecipeKind::cantor:
      r.lambda = j.contains("lambda") ? real_from_json(j.at("lambda"), where + ".lambda") : 1.0 / 3.0;
      r.depth = detail::get_field<int>(j, "depth", where);
      break;
    case RecipeKind::reciprocals:
    case RecipeKind::factorials:
    case RecipeKind::grid:
      r.count = detail::get_field<std::int64_t>(j, "count", where);
      break;
    case RecipeKind::product:
    case RecipeKind::rotated_product:
      r.parts.push_back(recipe_from_json(detail::require(j, "left", where), where + ".left"));
      r.parts.push_back(recipe_from_json(detail::require(j, "right", where), where + ".right"));
      break;
    case RecipeKind::affine_image: {
      r.parts.push_back(recipe_from_json(detail::require(j, "source", where), where + ".source"));
      const auto& rows = detail::require(j, "matrix", where);
      if (!rows.is_array() || rows.empty()) throw ArgumentError(where + ".matrix: expected a nonempty array of rows");
      r.matrix.rows = rows.size();
      r.matrix.cols = rows.front().size();
      for (const auto& row : rows) {
        if (!row.is_array() || row.size() != r.matrix.cols) throw ArgumentError(where + ".matrix: ragged rows");
        for (const auto& v : row) r.matrix.values.push_back(real_from_json(v, where + ".matrix"));
      }
      for (const auto& v : detail::require(j, "offset", where)) r.offset.push_back(real_from_json(v, where + ".offset"));
      break;
    }
    case RecipeKind::graph: {
      const auto& base = detail::require(j, "base", where);
      const auto& values = detail::require(j, "values", where);
      if (!base.is_array() || !values.is_array() || base.size() != values.size()) {
        throw ArgumentError(where + ".base: must be an array matching values in length");
      }
      r.table.base_dim = 0;
      for (const auto& u : base) {
        if (u.is_array()) {
          if (r.table.base_dim == 0) r.table.base_dim = u.size();
          if (u.size() != r.table.base_dim) throw ArgumentError(where + ".base: ragged base points");
          for (const auto& c : u) r.table.base.push_back(real_from_json(c, where + ".base"));
        } else {
          r.table.base_dim = 1;
          r.table.base.push_back(real_from_json(u, where + ".base"));
        }
      }
      if (r.table.base_dim == 0) r.table.base_dim = 1;
      for (const auto& v : values) r.table.values.push_back(real_from_json(v, where + ".values"));
      break;
    }
    case RecipeKind::set_union: {
      const auto& parts = detail::require(j, "parts", where);
      if (!parts.is_array() || parts.empty()) throw ArgumentError(where + ".parts: expected a nonempty array");
      for (std::size_t i = 0; i < parts.size(); ++i) {
        r.parts.push_back(recipe_from_json(parts[i], where + ".parts[" + std::to_string(i) + "]"));
      }
      break;
    }
  }
  if (j.contains("snowflake")) r.snowflake = real_from_json(j.at("snowflake"), where + ".snowflake");
  return r;
}

inline Json recipe_to_json(const SetRecipe& r) {
  Json j{{"kind", to_string(r.kind)}};
  switch (r.kind) {
    case RecipeKind::cantor:
      j["lambda"] = r.lambda;
      j["depth"] = r.depth;
      break;
    case RecipeKind::reciprocals:
    case RecipeKind::factorials:
    case RecipeKind::grid:
      j["count"] = r.count;
      break;
    case RecipeKind::product:
    case RecipeKind::rotated_product:
      j["left"] = recipe_to_json(r.parts.at(0));
      j["right"] = recipe_to_json(r.parts.at(1));
      break;
    case RecipeKind::affine_image: {
      j["source"] = recipe_to_json(r.parts.at(0));
      Json rows = Json::array();
      for (std::size_t i = 0; i < r.matrix.rows; ++i) {
        Json row = Json::array();
        for (std::size_t c = 0; c < r.matrix.cols; ++c) row.push_back(r.matrix(i, c));
        rows.push_back(std::move(row));
      }
      j["matrix"] = std::move(rows);
      j["offset"] = r.offset;
      break;
    }
    case RecipeKind::graph: {
      Json base = Json::array();
      for (std::size_t i = 0; i < r.table.values.size(); ++i) {
        Json u = Json::array();
        for (std::size_t c = 0; c < r.table.base_dim; ++c) u.push_back(r.table.base[i * r.table.base_dim + c]);
        base.push_back(std::move(u));
      }
      j["base"] = std::move(base);
      j["values"] = r.table.values;
      break;
    }
    case RecipeKind::set_union: {
      Json parts = Json::array();
      for (const auto& p : r.parts) parts.push_back(recipe_to_json(p));
      j["parts"] = std::move(parts);
      break;
    }
  }
  if (r.snowflake) j["snowflake"] = *r.snowflake;
  return j;
}

struct BuiltSet {
  PointSet points;
  Json provenance;
};

inline BuiltSet build(const SetRecipe& r) {
  BuiltSet out;
  out.provenance = Json{{"kind", to_string(r.kind)}};
  switch (r.kind) {
    case RecipeKind::cantor:
      out.points = cantor(r.lambda, r.depth);
      break;
    case RecipeKind::reciprocals:
      out.points = reciprocals(r.count);
      break;
    case RecipeKind::factorials:
      if (r.count > 20) throw ArgumentError("recipe.count: factorial count above 20 overflows");
      out.points = factorials(static_cast<int>(r.count));
      break;
    case RecipeKind::grid:
      out.points = uniform_grid(r.count);
      break;
    case RecipeKind::product: {
      auto a = build(r.parts.at(0));
      auto b = build(r.parts.at(1));
      out.points = product(a.points, b.points);
      out.provenance["parts"] = {a.provenance, b.provenance};
      break;
    }
    case RecipeKind::rotated_product: {
      auto a = build(r.parts.at(0));
      auto b = build(r.parts.at(1));
      out.points = rotated_product(a.points, b.points);
      out.provenance["parts"] = {a.provenance, b.provenance};
      out.provenance["map"] = "(x, y) -> ((x - y + 1) / 2, (x + y) / 2)";
      out.provenance["similarity_scale"] = 0.5;
      out.provenance["similarity_shift"] = {0.5, 0.0};
      break;
    }
    case RecipeKind::affine_image: {
      auto a = build(r.parts.at(0));
      auto img = affine_image(a.points, r.matrix, r.offset);
      out.points = std::move(img.points);
      out.provenance["parts"] = {a.provenance};
      out.provenance["lower_lipschitz"] = img.lower_lipschitz;
      out.provenance["upper_lipschitz"] = img.upper_lipschitz;
      break;
    }
    case RecipeKind::graph:
      out.points = graph_sample(r.table);
      break;
    case RecipeKind::set_union: {
      Json parts = Json::array();
      auto first = build(r.parts.front());
      out.points = first.points;
      parts.push_back(first.provenance);
      for (std::size_t i = 1; i < r.parts.size(); ++i) {
        auto next = build(r.parts[i]);
        out.points = set_union(out.points, next.points);
        parts.push_back(next.provenance);
      }
      out.provenance["parts"] = std::move(parts);
      break;
    }
  }
  if (r.snowflake) out.points = out.points.with_metric(Metric{*r.snowflake});
  if (out.points.trusted_level()) out.provenance["trusted_level"] = *out.points.trusted_level();
  out.provenance["size"] = out.points.size();
  out.provenance["dim"] = out.points.dim();
  return out;
}

}  // namespace metricdim
