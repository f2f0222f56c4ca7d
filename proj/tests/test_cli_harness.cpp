#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>

#include "metricdim/harness.hpp"

using namespace metricdim;

namespace {

RunConfig load(const std::string& name) {
  return config_from_json(Json::parse(read_text_file(std::string(METRICDIM_CONFIG_DIR) + "/" + name)));
}

RunConfig parse(const char* text) { return config_from_json(Json::parse(text)); }

std::string error_of(const RunResult& r) { return r.report.value("error", std::string()); }

std::string without_timestamp(Json report) {
  report.erase("timestamp");
  return report_text(report);
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("metricdim_harness_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, UnknownTopLevelFieldIsNamed) {
  try {
    parse(R"({"command": "generate", "recipie": {}})");
    FAIL() << "expected an ArgumentError";
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("config.recipie"), std::string::npos);
  }
}

TEST(Config, RecipeErrorsCarryTheFieldPath) {
  try {
    parse(R"({"command": "generate", "recipe": {"kind": "cantor"}})");
    FAIL() << "expected an ArgumentError";
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("recipe.depth"), std::string::npos);
  }
}

TEST(Config, SeedDefaultsToZeroAndRoundTrips) {
  const auto c = parse(R"({"command": "udim", "recipe": {"kind": "grid", "count": 33}})");
  EXPECT_EQ(c.seed, 0u);
  const auto again = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(again), config_to_json(c));
}

TEST(Run, GenerateCantorDepthTwo) {
  const auto r = run(load("cantor-generate.json"));
  EXPECT_EQ(r.exit_code, kExitOk);
  EXPECT_EQ(r.report.at("value"), 8);
  ASSERT_EQ(r.tables.size(), 1u);
  EXPECT_EQ(r.tables[0].first, "points.csv");
  std::istringstream csv(r.tables[0].second);
  const auto ps = read_csv(csv);
  EXPECT_EQ(ps.size(), 8u);
  EXPECT_EQ(r.report.at("schema"), kReportSchema);
}

TEST(Run, ReciprocalsUdimNearOneHalf) {
  const auto r = run(load("reciprocals-udim.json"));
  ASSERT_EQ(r.exit_code, kExitOk) << error_of(r);
  EXPECT_NEAR(r.report.at("value").get<double>(), 0.5, 0.05);
  EXPECT_EQ(r.report.at("method"), "udim-boxcount");
  EXPECT_EQ(r.report.at("window"), "8..16");
}

TEST(Run, UnknownParamIsAnErrorNamingIt) {
  const auto r = run(parse(R"({"command": "projdim", "recipe": {"kind": "grid", "count": 65},
                               "params": {"level": 4, "thetta": 1}})"));
  EXPECT_EQ(r.exit_code, kExitError);
  EXPECT_EQ(r.report.at("status"), "error");
  EXPECT_NE(error_of(r).find("params.thetta"), std::string::npos);
}

TEST(Run, MissingParamIsAnErrorNamingIt) {
  const auto r = run(parse(R"({"command": "projdim", "recipe": {"kind": "grid", "count": 65}})"));
  EXPECT_EQ(r.exit_code, kExitError);
  EXPECT_NE(error_of(r).find("params.level"), std::string::npos);
}

TEST(Run, WrongTypeAndUntrustedLevelAreErrors) {
  const auto wrong = run(parse(R"({"command": "projdim", "recipe": {"kind": "grid", "count": 65},
                                   "params": {"level": "four"}})"));
  EXPECT_EQ(wrong.exit_code, kExitError);
  EXPECT_NE(error_of(wrong).find("params.level"), std::string::npos);
  const auto deep = run(parse(R"({"command": "projdim", "recipe": {"kind": "grid", "count": 65},
                                  "params": {"level": 9}})"));
  EXPECT_EQ(deep.exit_code, kExitError);
  EXPECT_NE(error_of(deep).find("trusted"), std::string::npos);
}

TEST(Run, UnknownCommandAndMissingInput) {
  EXPECT_EQ(run(parse(R"({"command": "fly", "recipe": {"kind": "grid", "count": 3}})")).exit_code, kExitError);
  const auto r = run(parse(R"({"command": "generate"})"));
  EXPECT_EQ(r.exit_code, kExitError);
  EXPECT_NE(error_of(r).find("recipe or an input"), std::string::npos);
}

TEST(Run, InconclusiveClassificationExitsTwo) {
  const auto r = run(parse(R"({"command": "classify", "recipe": {"kind": "cantor", "depth": 12},
                               "params": {"levels": [5, 6, 7, 8, 9, 10], "j": 3}})"));
  EXPECT_EQ(r.exit_code, kExitInconclusive);
  EXPECT_EQ(r.report.at("status"), "inconclusive");
  EXPECT_EQ(r.report.at("value"), "inconclusive");
}

TEST(Run, AbsentPartitionExitsTwo) {
  // Point fibers at every column with each cell counted as residue.
  const auto r = run(parse(R"({"command": "uniform-partition",
      "recipe": {"kind": "product", "left": {"kind": "grid", "count": 17}, "right": {"kind": "grid", "count": 17}},
      "params": {"level": 4, "j_max": 4, "run_threshold": 100}})"));
  EXPECT_EQ(r.exit_code, kExitInconclusive);
  EXPECT_EQ(r.report.at("status"), "absent");
}

TEST(Run, ReportEmbedsResolvedDefaults) {
  const auto r = run(parse(R"({"command": "projdim", "recipe": {"kind": "grid", "count": 65}, "params": {"level": 4}})"));
  ASSERT_EQ(r.exit_code, kExitOk) << error_of(r);
  const auto& params = r.report.at("config").at("params");
  EXPECT_EQ(params.at("level"), 4);
  EXPECT_EQ(params.at("theta"), 1.0);
  EXPECT_EQ(params.at("j"), 2);
  EXPECT_EQ(r.report.at("params"), params);
}

TEST(Run, EmbeddedConfigReproducesTheReport) {
  for (const char* name : {"cantor-udim.json", "cantor-square-sparse-profile.json", "two-points-amplify.json",
                           "rotated-cantor-projdim.json"}) {
    const auto first = run(load(name));
    const auto again = run(config_from_json(first.report.at("config")));
    EXPECT_EQ(without_timestamp(first.report), without_timestamp(again.report)) << name;
    EXPECT_EQ(first.tables, again.tables) << name;
  }
}

TEST(Run, SeedIsRecordedAndDrivesSampling) {
  auto c = load("reciprocals-amplify.json");
  const auto a = run(c);
  EXPECT_EQ(a.report.at("config").at("seed"), 7);
  EXPECT_EQ(without_timestamp(a.report), without_timestamp(run(c).report));
}

TEST(Run, ValidateCertificateFromFiles) {
  const auto dir = scratch("validate");
  auto profile = load("cantor-square-sparse-profile.json");
  const auto produced = run(profile);
  ASSERT_EQ(produced.exit_code, kExitOk) << error_of(produced);
  write_outputs(produced, (dir / "profile").string());
  const auto cert_path = dir / "profile.cert-k5.json";
  const auto cover_path = dir / "profile.cover-k5.json";
  ASSERT_TRUE(std::filesystem::exists(cert_path));
  ASSERT_TRUE(std::filesystem::exists(cover_path));
  ASSERT_TRUE(std::filesystem::exists(dir / "profile.json"));

  RunConfig check;
  check.command = "validate-cert";
  check.params = Json{{"certificate", cert_path.string()}, {"cover", cover_path.string()}};
  const auto ok = run(check);
  EXPECT_EQ(ok.exit_code, kExitOk) << error_of(ok);
  EXPECT_EQ(ok.report.at("value"), true);

  auto cert = Json::parse(read_text_file(cert_path.string()));
  auto& point = cert["classes"][0][0];
  point[1] = point[1].get<Index>() + 1;
  const auto tampered = dir / "tampered.json";
  write_text_file(tampered.string(), cert.dump());
  check.params["certificate"] = tampered.string();
  const auto bad = run(check);
  EXPECT_EQ(bad.exit_code, kExitError);
  EXPECT_EQ(bad.report.at("status"), "invalid");
  const auto problems = bad.report.at("result").at("problems");
  ASSERT_FALSE(problems.empty());
  EXPECT_NE(problems.dump().find("(" + std::to_string(point[0].get<Index>()) + ", "), std::string::npos);
}

TEST(Run, ValidateCertificateAgainstRecipeLevel) {
  const auto dir = scratch("recipe");
  const auto produced = run(load("cantor-square-sparse-profile.json"));
  write_outputs(produced, (dir / "p").string());
  auto check = load("cantor-square-sparse-profile.json");
  check.command = "validate-cert";
  check.params = Json{{"certificate", (dir / "p.cert-k4.json").string()}, {"level", 4}};
  EXPECT_EQ(run(check).exit_code, kExitOk);
  check.params["level"] = 5;
  EXPECT_EQ(run(check).exit_code, kExitError);
}

TEST(Run, EveryCommandNamesItsFirstMissingParam) {
  EXPECT_EQ(command_names().size(), 13u);
  for (const auto& name : command_names()) {
    RunConfig c = parse(R"({"recipe": {"kind": "grid", "count": 65}})");
    c.command = name;
    const auto r = run(c);
    if (r.exit_code == kExitOk) continue;
    EXPECT_EQ(r.exit_code, kExitError) << name;
    EXPECT_EQ(error_of(r).rfind("params.", 0), 0u) << name << ": " << error_of(r);
  }
}
