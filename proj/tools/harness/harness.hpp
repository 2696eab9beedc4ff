#pragma once

#include <string>

namespace wavegec::harness {

struct CliOptions {
  std::string config_path;
  std::string out_dir = "out";
  int workers = 0;       // 0: hardware concurrency
  double horizon = 0.0;  // 0: take the config value
  bool seedless = true;  // runs are deterministic; the flag documents this
};

// Subcommand entry points; each returns a process exit code, writes its
// artifacts plus manifest.json under out_dir, and prints a summary line per
// result.  Wall-clock goes to stderr so the JSON outputs stay
// byte-deterministic.
int run_classify(const CliOptions& opts);
int run_simulate(const CliOptions& opts);
int run_certify(const CliOptions& opts);
int run_counterexample(const CliOptions& opts);
int run_report(const CliOptions& opts);

int run_cli(int argc, const char* const* argv);

}  // namespace wavegec::harness
