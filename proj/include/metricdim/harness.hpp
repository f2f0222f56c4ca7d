#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <exception>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "metricdim/amplifier.hpp"
#include "metricdim/estimators.hpp"
#include "metricdim/io.hpp"
#include "metricdim/partition.hpp"
#include "metricdim/recipe.hpp"
#include "metricdim/serialize.hpp"
#include "metricdim/sparse.hpp"

namespace metricdim {

inline constexpr int kReportSchema = 1;

/// Highest level the harness box-counts by default.
inline constexpr int kDefaultTopLevel = 20;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInconclusive = 2;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"generate", "boxcount",       "udim",          "adim",
                                              "adim-loc", "projdim",        "tdim0",         "classify",
                                              "sparse-profile", "thmb-classify", "uniform-partition", "amplify",
                                              "validate-cert"};
  return names;
}

struct RunConfig {
  std::string command;
  std::optional<SetRecipe> recipe;
  std::string input;  ///< point CSV path, used when recipe is absent
  Json params = Json::object();
  std::uint64_t seed = 0;
  std::string output;  ///< path prefix; empty writes nothing
};

inline RunConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ArgumentError("config: expected a JSON object");
  static const std::set<std::string> known{"command", "recipe", "input", "params", "seed", "output"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ArgumentError("config." + key + ": unknown field");
  }
  RunConfig c;
  try {
    if (j.contains("command")) c.command = j.at("command").get<std::string>();
    if (j.contains("input")) c.input = j.at("input").get<std::string>();
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const Json::exception&) {
    throw ArgumentError("config: command, input and output must be strings and seed an unsigned integer");
  }
  if (j.contains("recipe")) c.recipe = recipe_from_json(j.at("recipe"));
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ArgumentError("config.params: expected an object");
    c.params = j.at("params");
  }
  return c;
}

inline Json config_to_json(const RunConfig& c) {
  Json j{{"command", c.command}, {"params", c.params}, {"seed", c.seed}, {"output", c.output}};
  if (c.recipe) j["recipe"] = recipe_to_json(*c.recipe);
  if (!c.input.empty()) j["input"] = c.input;
  return j;
}

struct RunResult {
  int exit_code = kExitOk;
  Json report;
  std::vector<std::pair<std::string, std::string>> tables;  ///< (file suffix, contents)
};

namespace detail {

/// Reads command parameters, recording every value (defaults included) so
/// the report carries the fully resolved block. Unknown keys are rejected.
class ParamReader {
 public:
  ParamReader(const Json& params, std::string command) : params_(params), command_(std::move(command)) {}

  template <typename T>
  T get(const char* key, T fallback) {
    if (auto v = maybe<T>(key)) return *v;
    resolved_[key] = fallback;
    return fallback;
  }

  template <typename T>
  T need(const char* key) {
    if (auto v = maybe<T>(key)) return *v;
    throw ArgumentError(where(key) + ": missing field for " + command_);
  }

  template <typename T>
  std::optional<T> maybe(const char* key) {
    used_.insert(key);
    if (!params_.contains(key)) return std::nullopt;
    try {
      T value = params_.at(key).get<T>();
      resolved_[key] = params_.at(key);
      return value;
    } catch (const Json::exception&) {
      throw ArgumentError(where(key) + ": wrong type");
    }
  }

  double real(const char* key, std::optional<double> fallback = std::nullopt) {
    used_.insert(key);
    if (!params_.contains(key)) {
      if (!fallback) throw ArgumentError(where(key) + ": missing field for " + command_);
      resolved_[key] = *fallback;
      return *fallback;
    }
    resolved_[key] = params_.at(key);
    return real_from_json(params_.at(key), where(key));
  }

  std::optional<LevelWindow> window(const char* key) {
    auto pair = maybe<std::vector<int>>(key);
    if (!pair) return std::nullopt;
    if (pair->size() != 2) throw ArgumentError(where(key) + ": expected [k_min, k_max]");
    return LevelWindow{(*pair)[0], (*pair)[1]};
  }

  void set_resolved(const char* key, Json value) { resolved_[key] = std::move(value); }

  /// Rejects keys nobody asked for; returns the resolved block.
  Json finish() {
    for (const auto& [key, value] : params_.items()) {
      if (!used_.count(key)) throw ArgumentError(where(key.c_str()) + ": unknown field for " + command_);
    }
    return resolved_;
  }

  [[nodiscard]] std::string where(const char* key) const { return std::string("params.") + key; }

 private:
  const Json& params_;
  std::string command_;
  std::set<std::string> used_;
  Json resolved_ = Json::object();
};

struct LoadedSet {
  PointSet points;
  Json provenance;
};

inline LoadedSet load_set(const RunConfig& c) {
  if (c.recipe) {
    auto built = build(*c.recipe);
    return {std::move(built.points), std::move(built.provenance)};
  }
  if (c.input.empty()) throw ArgumentError("config: " + c.command + " needs a recipe or an input path");
  std::istringstream in(read_text_file(c.input));
  auto ps = read_csv(in);
  return {ps, Json{{"input", c.input}, {"size", ps.size()}, {"dim", ps.dim()}}};
}

inline int default_top_level(const PointSet& ps) { return std::min(ps.level_limit(), kDefaultTopLevel); }

/// Drops the lowest third and the highest sixth of the levels 0..top.
inline LevelWindow default_window(int top) {
  const int low = (top + 2) / 3;
  const int high = top - top / 6;
  return {low, std::max(high, low + 1)};
}

inline void check_level(const PointSet& ps, int k, const std::string& where) {
  if (k < 0 || k > ps.level_limit()) {
    throw ArgumentError(where + ": level " + std::to_string(k) + " lies outside [0, " +
                        std::to_string(ps.level_limit()) + "], the sample's trusted range");
  }
}

inline std::vector<DyadicCover> covers_at(const PointSet& ps, const std::vector<int>& levels, const std::string& where) {
  std::vector<DyadicCover> out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    check_level(ps, levels[i], where);
    if (i > 0 && levels[i] <= levels[i - 1]) throw ArgumentError(where + ": levels must be strictly increasing");
    out.push_back(cover_points(ps, levels[i]));
  }
  return out;
}

inline std::vector<double> exponent_radii(const std::vector<int>& exponents) {
  std::vector<double> radii;
  for (int e : exponents) radii.push_back(std::ldexp(1.0, -e));
  return radii;
}

inline std::string curve_csv(const ScalingCurve& curve) {
  std::ostringstream os;
  write_curve_csv(os, curve);
  return os.str();
}

inline std::string points_csv(const PointSet& ps) {
  std::ostringstream os;
  write_csv(os, ps);
  return os.str();
}

inline NetMode net_mode(const std::string& name, const std::string& where) {
  if (name == "greedy") return NetMode::greedy;
  if (name == "exact") return NetMode::exact;
  throw ArgumentError(where + ": expected \"greedy\" or \"exact\"");
}

/// What a command hands back before the common report fields are added.
struct Outcome {
  Json method = nullptr;
  Json value = nullptr;
  Json window = nullptr;
  Json spread = nullptr;
  Json result = Json::object();
  std::string status = "ok";
  int exit_code = kExitOk;
  std::vector<std::pair<std::string, std::string>> tables;

  void take(const DimEstimate& e) {
    method = e.method;
    value = e.value;
    window = e.window;
    spread = e.spread;
  }
};

inline Outcome run_generate(const LoadedSet& set, ParamReader&) {
  Outcome o;
  o.method = "generate";
  o.value = set.points.size();
  o.result = set.provenance;
  o.tables.emplace_back("points.csv", points_csv(set.points));
  return o;
}

inline ScalingCurve curve_from_params(const PointSet& ps, ParamReader& p) {
  const int k_min = p.get("k_min", 0);
  const int k_max = p.get("k_max", default_top_level(ps));
  check_level(ps, k_max, p.where("k_max"));
  return boxcount_curve(ps, k_min, k_max);
}

inline Outcome run_boxcount(const LoadedSet& set, ParamReader& p) {
  Outcome o;
  const auto curve = curve_from_params(set.points, p);
  o.method = "boxcount";
  o.result = Json{{"curve", curve_to_json(curve)}};
  o.tables.emplace_back("curve.csv", curve_csv(curve));
  return o;
}

inline Outcome run_udim(const LoadedSet& set, ParamReader& p) {
  Outcome o;
  const auto method = p.get<std::string>("method", "boxcount");
  if (method == "boxcount") {
    auto window = p.window("window");
    if (window) {
      check_level(set.points, window->k_max, p.where("window"));
    } else {
      const int top = p.get("k_max", default_top_level(set.points));
      check_level(set.points, top, p.where("k_max"));
      window = default_window(top);
      p.set_resolved("window", {window->k_min, window->k_max});
    }
    const auto curve = boxcount_curve(set.points, window->k_min, window->k_max);
    o.take(udim_fit(curve, *window));
    o.result = Json{{"curve", curve_to_json(curve)}};
    o.tables.emplace_back("curve.csv", curve_csv(curve));
  } else if (method == "net") {
    const auto exponents = p.need<std::vector<int>>("radius_exponents");
    const auto mode = net_mode(p.get<std::string>("mode", "greedy"), p.where("mode"));
    const auto radii = exponent_radii(exponents);
    const auto samples = net_curve(set.points, radii, mode);
    o.take(net_udim(set.points, radii, mode));
    std::ostringstream csv;
    csv << "radius,count\n";
    Json rows = Json::array();
    for (const auto& s : samples) {
      csv << format_real(s.radius) << ',' << s.count << '\n';
      rows.push_back({s.radius, s.count});
    }
    o.result = Json{{"nets", std::move(rows)}};
    o.tables.emplace_back("nets.csv", csv.str());
  } else {
    throw ArgumentError(p.where("method") + ": expected \"boxcount\" or \"net\"");
  }
  return o;
}

inline std::vector<ScalePair> scale_pairs_from_params(ParamReader& p) {
  if (auto explicit_pairs = p.maybe<std::vector<std::vector<double>>>("pairs")) {
    std::vector<ScalePair> pairs;
    for (const auto& rR : *explicit_pairs) {
      if (rR.size() != 2) throw ArgumentError(p.where("pairs") + ": each pair is [r, R]");
      pairs.push_back({rR[0], rR[1]});
    }
    return pairs;
  }
  const auto outer = p.need<std::vector<int>>("outer_exponents");
  const auto ratio = p.need<std::vector<int>>("ratio_exponents");
  if (outer.size() != 2 || ratio.size() != 2) {
    throw ArgumentError("params.outer_exponents and params.ratio_exponents are [min, max] ranges");
  }
  return geometric_scale_pairs(outer[0], outer[1], ratio[0], ratio[1]);
}

inline Outcome run_adim(const LoadedSet& set, ParamReader& p) {
  Outcome o;
  AdimScanParams params;
  params.centers = p.get<std::size_t>("centers", params.centers);
  params.scale_pairs = scale_pairs_from_params(p);
  params.quantile = p.real("quantile", params.quantile);
  params.mode = net_mode(p.get<std::string>("mode", "greedy"), p.where("mode"));
  std::vector<AdimSample> table;
  o.take(adim_scan(set.points, params, &table));
  std::ostringstream csv;
  csv << "center,r,R,net,exponent\n";
  for (const auto& s : table) {
    csv << s.center << ',' << format_real(s.r) << ',' << format_real(s.R) << ',' << s.net << ','
        << format_real(s.exponent) << '\n';
  }
  o.result = Json{{"samples", table.size()}};
  o.tables.emplace_back("samples.csv", csv.str());
  return o;
}

inline Outcome run_adim_loc(const LoadedSet& set, ParamReader& p) {
  Outcome o;
  const auto centers = strided_centers(set.points.size(), p.get<std::size_t>("centers", 64));
  const auto scales = exponent_radii(p.need<std::vector<int>>("scale_exponents"));
  const auto window = p.window("window");
  if (!window) throw ArgumentError("params.window: missing field for adim-loc");
  o.take(adim_via_localization(set.points, centers, scales, *window));
  o.result = Json{{"members_requested", centers.size() * scales.size()}};
  return o;
}

inline Outcome run_projdim(const LoadedSet& set, ParamReader& p) {
  Outcome o;
  const int k = p.need<int>("level");
  check_level(set.points, k, p.where("level"));
  const double theta = p.real("theta", 1.0);
  const int j = p.get("j", 2);
  const auto pd = proj_dim(cover_points(set.points, k), theta, j);
  o.method = "projdim";
  o.value = pd.value;
  o.result = Json{{"selection", pd.selection}};
  return o;
}

inline Outcome run_tdim0(const LoadedSet& set, ParamReader& p) {
  Outcome o;
  const auto covers = covers_at(set.points, p.need<std::vector<int>>("levels"), p.where("levels"));
  const auto res = tdim_zero_test(covers, p.real("shrink", 0.75));
  o.method = "tdim0";
  o.value = res.zero;
  o.result = Json{{"diameters", res.diameters}};
  return o;
}

inline Outcome run_classify(const LoadedSet& set, ParamReader& p) {
  Outcome o;
  const auto covers = covers_at(set.points, p.need<std::vector<int>>("levels"), p.where("levels"));
  const auto cls = classify_interior(covers, p.real("theta", 1.0), p.get("j", 2));
  o.method = "classify-interior";
  o.value = to_string(cls);
  if (cls == InteriorClass::inconclusive) {
    o.status = "inconclusive";
    o.exit_code = kExitInconclusive;
  }
  return o;
}

inline Outcome run_sparse_profile(const LoadedSet& set, ParamReader& p) {
  Outcome o;
  const auto covers = covers_at(set.points, p.need<std::vector<int>>("levels"), p.where("levels"));
  const auto s = p.get<std::size_t>("s", 1);
  const bool emit = p.get("emit_certificates", false);
  const auto profile = sparseness_profile(covers, s);
  o.method = "sparse-profile";
  o.value = profile.entries.back().eps;
  o.result = Json{{"profile", to_json(profile)}};
  std::ostringstream csv;
  csv << "k,s,delta,eps\n";
  for (const auto& e : profile.entries) csv << e.level << ',' << e.s << ',' << e.delta << ',' << format_real(e.eps) << '\n';
  o.tables.emplace_back("profile.csv", csv.str());
  if (emit) {
    for (std::size_t i = 0; i < covers.size(); ++i) {
      const auto& e = profile.entries[i];
      const auto cert = sparse_decompose(covers[i], s, static_cast<double>(e.delta), SearchMode::greedy);
      if (!cert) throw ContractViolation("profile delta no longer admits a greedy certificate");
      const auto tag = "k" + std::to_string(e.level);
      o.tables.emplace_back("cert-" + tag + ".json", certificate_to_json(*cert).dump(2) + "\n");
      o.tables.emplace_back("cover-" + tag + ".json", cover_to_json(covers[i]).dump() + "\n");
    }
  }
  return o;
}

inline Outcome run_thmb_classify(const LoadedSet& set, ParamReader& p) {
  Outcome o;
  const int k = p.need<int>("level");
  check_level(set.points, k, p.where("level"));
  const int j = p.get("j", 2);
  const auto threshold = p.maybe<Index>("run_threshold");
  const auto cover = cover_points(set.points, k);
  const auto cl = classify_planar_cover(cover, j, threshold);
  p.set_resolved("run_threshold", cl.run_threshold);
  double worst = 0.0;
  std::size_t total = 0;
  for (const auto& pc : cl.classes) {
    worst = std::max(worst, pc.eps);
    total += pc.cells.size();
  }
  o.method = "thmb-classify";
  o.value = worst;
  o.result = to_json(cl);
  o.result["partition_size"] = total;
  o.result["cover_size"] = cover.size();
  if (auto window = p.window("family_window")) o.result["family_udim"] = to_json(fiber_family_udim(set.points, 1, *window));
  return o;
}

inline Outcome run_uniform_partition(const LoadedSet& set, ParamReader& p) {
  Outcome o;
  const int k = p.need<int>("level");
  check_level(set.points, k, p.where("level"));
  PartitionSearchParams params;
  params.j_max = p.get("j_max", params.j_max);
  params.run_threshold = p.maybe<Index>("run_threshold");
  params.candidate_budget = p.get<std::uint64_t>("candidate_budget", params.candidate_budget);
  const auto family = fibers(cover_points(set.points, k), 1);
  const auto found = uniform_partition_search(family, params);
  o.method = "uniform-partition";
  if (found) {
    o.value = found->parts.size();
    o.result = to_json(*found);
  } else {
    o.status = "absent";
    o.exit_code = kExitInconclusive;
  }
  return o;
}

inline Json trace_with_checks(const AmplifierTrace& trace) {
  Json j = to_json(trace);
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    if (const auto& gap = trace.iterations[i].gap) {
      j["iterations"][i]["gap"]["violations"] = cone_gap_violations(trace.iterates[i], *gap);
    }
  }
  return j;
}

inline Outcome run_amplify(const LoadedSet& set, ParamReader& p, std::uint64_t seed) {
  Outcome o;
  const double eps = p.real("eps");
  const int max_iters = p.get("max_iters", 5);
  AmplifierCaps caps;
  caps.quotient.cap = p.get<std::uint64_t>("quotient_cap", caps.quotient.cap);
  caps.quotient.window = p.real("quotient_window", caps.quotient.window);
  caps.quotient.seed = seed;
  caps.cone.angular_resolution = p.real("angular_resolution", caps.cone.angular_resolution);
  caps.cone.max_directions = p.get<std::uint64_t>("max_directions", caps.cone.max_directions);
  caps.max_set = p.get<std::size_t>("max_set", caps.max_set);
  const bool dump = p.get("dump_iterates", false);
  AmplifierTrace trace;
  try {
    trace = amplify(set.points, eps, max_iters, caps);
  } catch (const AmplifierBudgetError& e) {
    o.status = "error";
    o.exit_code = kExitError;
    o.result = Json{{"error", e.what()}, {"partial_trace", trace_with_checks(e.partial())}};
    return o;
  }
  o.method = "amplify";
  o.value = to_string(trace.verdict);
  o.result = trace_with_checks(trace);
  if (trace.verdict == AmplifierVerdict::inconclusive) {
    o.status = "inconclusive";
    o.exit_code = kExitInconclusive;
  }
  if (dump) {
    for (std::size_t i = 0; i < trace.iterates.size(); ++i) {
      o.tables.emplace_back("iter" + std::to_string(i) + ".csv", points_csv(trace.iterates[i]));
    }
  }
  return o;
}

inline Outcome run_validate_cert(const RunConfig& c, ParamReader& p, Json& provenance) {
  Outcome o;
  const auto cert_path = p.need<std::string>("certificate");
  DyadicCover cover;
  if (auto cover_path = p.maybe<std::string>("cover")) {
    cover = cover_from_json(Json::parse(read_text_file(*cover_path)));
    provenance = Json{{"cover", *cover_path}};
  } else {
    const auto set = load_set(c);
    const int k = p.need<int>("level");
    check_level(set.points, k, p.where("level"));
    cover = cover_points(set.points, k);
    provenance = set.provenance;
  }
  Json raw;
  try {
    raw = Json::parse(read_text_file(cert_path));
  } catch (const Json::parse_error& e) {
    throw ArgumentError("certificate file is not JSON: " + std::string(e.what()));
  }
  const auto cert = certificate_from_json(raw);
  const auto problems = validate_certificate(cover, cert);
  o.method = "validate-cert";
  o.value = problems.empty();
  o.result = Json{{"problems", problems}, {"s", cert.s()}, {"level", cert.level}};
  if (!problems.empty()) {
    o.status = "invalid";
    o.exit_code = kExitError;
  }
  return o;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

/// Runs one subcommand without touching the output prefix. Errors become an
/// error report with exit code 1.
inline RunResult run(const RunConfig& config) {
  RunResult out;
  Json resolved_config = config_to_json(config);
  Json report{{"schema", kReportSchema}, {"command", config.command}, {"timestamp", detail::utc_timestamp()}};
  try {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), config.command) == names.end()) {
      throw ArgumentError("config.command: unknown subcommand '" + config.command + "'");
    }
    detail::ParamReader params(config.params, config.command);
    detail::Outcome o;
    Json provenance;
    if (config.command == "validate-cert") {
      o = detail::run_validate_cert(config, params, provenance);
    } else {
      const auto set = detail::load_set(config);
      provenance = set.provenance;
      const auto& cmd = config.command;
      if (cmd == "generate") o = detail::run_generate(set, params);
      else if (cmd == "boxcount") o = detail::run_boxcount(set, params);
      else if (cmd == "udim") o = detail::run_udim(set, params);
      else if (cmd == "adim") o = detail::run_adim(set, params);
      else if (cmd == "adim-loc") o = detail::run_adim_loc(set, params);
      else if (cmd == "projdim") o = detail::run_projdim(set, params);
      else if (cmd == "tdim0") o = detail::run_tdim0(set, params);
      else if (cmd == "classify") o = detail::run_classify(set, params);
      else if (cmd == "sparse-profile") o = detail::run_sparse_profile(set, params);
      else if (cmd == "thmb-classify") o = detail::run_thmb_classify(set, params);
      else if (cmd == "uniform-partition") o = detail::run_uniform_partition(set, params);
      else o = detail::run_amplify(set, params, config.seed);
    }
    const Json resolved = params.finish();
    resolved_config["params"] = resolved;
    report["method"] = o.method;
    report["value"] = o.value;
    report["window"] = o.window;
    report["spread"] = o.spread;
    report["params"] = resolved;
    report["input"] = provenance;
    report["result"] = std::move(o.result);
    report["status"] = o.status;
    out.exit_code = o.exit_code;
    out.tables = std::move(o.tables);
  } catch (const std::exception& e) {
    report["status"] = "error";
    report["error"] = e.what();
    out.exit_code = kExitError;
    out.tables.clear();
  }
  report["config"] = resolved_config;
  report["exit_code"] = out.exit_code;
  out.report = std::move(report);
  return out;
}

/// Report text as written to disk; keys are sorted, so output is canonical.
inline std::string report_text(const Json& report) { return report.dump(2) + "\n"; }

/// Writes <prefix>.json and <prefix>.<suffix> for every table.
inline void write_outputs(const RunResult& result, const std::string& prefix) {
  write_text_file(prefix + ".json", report_text(result.report));
  for (const auto& [suffix, text] : result.tables) write_text_file(prefix + "." + suffix, text);
}

}  // namespace metricdim
