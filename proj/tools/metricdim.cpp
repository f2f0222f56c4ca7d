#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "metricdim/harness.hpp"

namespace {

std::string summary_line(const metricdim::RunResult& result) {
  const auto& r = result.report;
  std::string line = r.value("command", std::string("?")) + " " + r.value("status", std::string("?"));
  if (r.contains("value") && !r.at("value").is_null()) line += " value=" + r.at("value").dump();
  return line;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimension estimators, sparse decompositions and density amplification on dyadic samples"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  app.add_option("command", command, "Subcommand; overrides the config's command field")
      ->check(CLI::IsMember(metricdim::command_names()));
  app.add_option("--config", config_path, "JSON run config")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Seed; overrides the config's seed");
  app.add_option("--out", out, "Output path prefix; without it the report goes to stdout");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every argument error maps to the common error code.
    return app.exit(e) == 0 ? metricdim::kExitOk : metricdim::kExitError;
  }

  metricdim::RunConfig config;
  try {
    config = metricdim::config_from_json(metricdim::Json::parse(metricdim::read_text_file(config_path)));
  } catch (const metricdim::Json::parse_error& e) {
    std::cerr << "error: " << config_path << " is not valid JSON: " << e.what() << '\n';
    return metricdim::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return metricdim::kExitError;
  }
  if (!command.empty()) config.command = command;
  if (seed) config.seed = *seed;
  if (out) config.output = *out;

  const auto result = metricdim::run(config);
  if (result.report.contains("error")) std::cerr << "error: " << result.report.at("error").get<std::string>() << '\n';
  if (result.report.contains("result") && result.report.at("result").contains("problems")) {
    for (const auto& problem : result.report.at("result").at("problems")) std::cerr << problem.get<std::string>() << '\n';
  }
  if (config.output.empty()) {
    std::cout << metricdim::report_text(result.report);
    return result.exit_code;
  }
  try {
    metricdim::write_outputs(result, config.output);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return metricdim::kExitError;
  }
  std::cout << summary_line(result) << '\n';
  return result.exit_code;
}
