// Copyright 2026 the mwsmf authors. Apache-2.0 license.
//
// Command-line front end over the C API. Exit codes: 0 success, 1 bad
// scenario or input, 2 finished run with missed expectations, 3 internal
// failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "mwsmf.h"

namespace {

constexpr int kExitBadInput = 1;
constexpr int kExitInternal = 3;

int map_status(int status) {
  switch (status) {
    case MWSMF_OK:
      return 0;
    case MWSMF_ERR_ARGUMENT:
    case MWSMF_ERR_SCENARIO:
    case MWSMF_ERR_NO_DATA:
    case MWSMF_ERR_IO:
      return kExitBadInput;
    default:
      return kExitInternal;
  }
}

int report_failure(int status) {
  std::cerr << "error: " << mwsmf_last_error() << "\n";
  return map_status(status);
}

bool write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) {
    std::cerr << "error: cannot write " << path.string() << "\n";
    return false;
  }
  return true;
}

struct RunArgs {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool trace = false;
  bool entropy = false;
};

int cmd_run(const RunArgs& args) {
  std::uint64_t seed = args.seed;
  if (args.entropy) {
    std::random_device rd;
    seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "seed: " << seed << "\n";
  }

  mwsmf_run* run = nullptr;
  int status = mwsmf_run_scenario(args.scenario.c_str(), seed,
                                  args.trace ? 1 : 0, &run);
  if (status != MWSMF_OK) return report_failure(status);

  int exit_code = mwsmf_run_exit_code(run);
  bool io_ok = true;
  if (!args.out_dir.empty()) {
    std::filesystem::path dir(args.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    io_ok = write_text(dir / "metrics.log", mwsmf_run_metrics(run)) &&
            write_text(dir / "report.txt", mwsmf_run_report(run)) &&
            write_text(dir / "mediation.log", mwsmf_run_mediation_log(run));
    if (io_ok && args.trace)
      io_ok = write_text(dir / "trace.log", mwsmf_run_trace(run));
  }

  std::cout << mwsmf_run_report(run);
  if (args.trace && args.out_dir.empty()) std::cout << mwsmf_run_trace(run);

  for (size_t i = 0; i < mwsmf_run_invocations(run); ++i) {
    if (mwsmf_run_invocation_matched(run, i)) continue;
    std::cerr << "miss: " << mwsmf_run_invocation_id(run, i) << " expected "
              << mwsmf_run_invocation_expected(run, i) << ", got "
              << mwsmf_run_invocation_status(run, i) << "\n";
  }

  mwsmf_run_free(run);
  if (!io_ok) return kExitBadInput;
  return exit_code;
}

int cmd_validate(const std::string& scenario) {
  int status = mwsmf_scenario_check(scenario.c_str());
  if (status != MWSMF_OK) return report_failure(status);
  std::cout << "ok\n";
  return 0;
}

int cmd_report(const std::string& metrics_path) {
  char* text = nullptr;
  int status = mwsmf_report_from_file(metrics_path.c_str(), &text);
  if (status != MWSMF_OK) return report_failure(status);
  std::cout << text;
  mwsmf_string_free(text);
  return 0;
}

int cmd_keygen(const std::string& dir, const std::string& identity, int bits) {
  int status = mwsmf_keystore_generate(dir.c_str(), identity.c_str(), bits);
  if (status != MWSMF_OK) return report_failure(status);
  std::cout << dir << "/" << identity << ".der\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mediation framework simulator"};
  app.set_version_flag("--version", mwsmf_version());
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Run a scenario to completion");
  run->add_option("scenario", run_args.scenario, "Scenario file")->required();
  run->add_option("--seed", run_args.seed, "Deterministic RNG seed");
  run->add_option("--out", run_args.out_dir,
                  "Directory for metrics.log, report.txt and trace.log");
  run->add_flag("--trace", run_args.trace, "Capture the event trace");
  run->add_flag("--entropy", run_args.entropy,
                "Draw the seed from system entropy (overrides --seed)");

  std::string validate_path;
  CLI::App* validate =
      app.add_subcommand("validate", "Check a scenario without running it");
  validate->add_option("scenario", validate_path, "Scenario file")->required();

  std::string metrics_path;
  CLI::App* report =
      app.add_subcommand("report", "Aggregate a previously written metric log");
  report->add_option("metrics", metrics_path, "Metric log file")->required();

  std::string key_dir;
  std::string key_identity;
  int key_bits = 1024;
  CLI::App* keygen = app.add_subcommand("keygen", "Generate an RSA keypair");
  keygen->add_option("dir", key_dir, "Keystore directory")->required();
  keygen->add_option("identity", key_identity, "Key owner identity")
      ->required();
  keygen->add_option("--bits", key_bits, "Modulus size: 1024 or 2048")
      ->check(CLI::IsMember({1024, 2048}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (validate->parsed()) return cmd_validate(validate_path);
    if (report->parsed()) return cmd_report(metrics_path);
    if (keygen->parsed()) return cmd_keygen(key_dir, key_identity, key_bits);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitBadInput;
}
