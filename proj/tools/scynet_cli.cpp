// scynet: run, verify and inspect simulated ScyNet domain scenarios.
//
// Exit codes: 0 clean, 1 invariant violation, 2 usage or malformed input.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "scynet/replay.hpp"
#include "scynet/sim.hpp"

namespace {

constexpr int kClean = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

int cmd_run(const std::string& scenario_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
            unsigned threads) {
  scynet::Scenario scenario;
  try {
    scenario = scynet::load_scenario(scenario_path);
  } catch (const scynet::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  if (seed) scenario.rng_seed = *seed;

  const std::string log_name = "events.log";
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    std::cerr << "error: cannot create output directory '" << out_dir << "'\n";
    return kUsage;
  }

  const scynet::SimResult result = scynet::run_scenario(scenario, {threads});
  {
    std::ofstream log(std::filesystem::path(out_dir) / log_name, std::ios::binary);
    for (const auto& line : result.log) log << line << "\n";
  }
  // The report is derived from the log so that it can be regenerated from it.
  const scynet::Replay replay = scynet::replay_log(result.log);
  {
    std::ofstream report(std::filesystem::path(out_dir) / "report.json", std::ios::binary);
    report << scynet::build_report(replay, log_name).dump(2) << "\n";
  }
  const auto violation = result.violation ? result.violation : replay.violation;
  if (violation) {
    std::cerr << "violation: " << *violation << "\n";
    return kViolation;
  }
  std::cout << scenario.name << ": " << replay.blocks << " blocks, clean\n";
  return kClean;
}

int cmd_verify(const std::string& log_path) {
  std::vector<std::string> lines;
  try {
    lines = scynet::read_log(log_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  const scynet::Replay replay = scynet::replay_log(lines);
  if (replay.violation) {
    std::cerr << "violation: " << *replay.violation << "\n";
    return kViolation;
  }
  std::cout << "ok: " << replay.records << " records, " << replay.blocks << " blocks\n";
  return kClean;
}

int cmd_inspect(const std::string& log_path, const std::string& query) {
  std::vector<std::string> lines;
  try {
    lines = scynet::read_log(log_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  const scynet::Replay replay = scynet::replay_log(lines);
  if (!replay.scenario) {
    std::cerr << "error: " << replay.violation.value_or("unreadable log") << "\n";
    return kUsage;
  }
  try {
    std::cout << scynet::inspect(replay, query);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  if (replay.violation) {
    std::cerr << "warning: " << *replay.violation << "\n";
    return kViolation;
  }
  return kClean;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run, verify and inspect simulated ScyNet domain scenarios"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, log_path, query;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;

  auto* run = app.add_subcommand("run", "Simulate a scenario and write events.log and report.json");
  run->add_option("scenario", scenario_path, "Scenario file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the scenario rngSeed");
  run->add_option("--threads", threads, "Validate proposals on this many worker threads")->check(CLI::Range(1u, 64u));

  auto* verify = app.add_subcommand("verify", "Replay an event log and check every invariant");
  verify->add_option("log", log_path, "Event log")->required();

  auto* insp = app.add_subcommand("inspect", "Print final state derived from an event log");
  insp->add_option("log", log_path, "Event log")->required();
  insp->add_option("--query", query, "balances | disqualifications | tournament N")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kClean : kUsage;
  }

  if (*run) return cmd_run(scenario_path, out_dir, seed, threads);
  if (*verify) return cmd_verify(log_path);
  return cmd_inspect(log_path, query);
}
