#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "penalearn/harness.hpp"
#include "penalearn/oracle.hpp"
#include "penalearn/trainer.hpp"

namespace penalearn {

// One flat config key. Every key is accepted both in a config file
// (`key = value`) and as a `--key value` flag.
struct ConfigKey {
  std::string name;
  std::string default_value;  // empty: no default / derived
  std::string range;
  std::string help;
};

const std::vector<ConfigKey>& config_keys();

struct RunConfig {
  std::string command;
  std::string problem;
  std::uint64_t seed = 0;
  int threads = 1;
  std::filesystem::path model = "penalearn.model";
  std::filesystem::path output;  // empty: stdout
  TrainConfig train;
  OracleConfig oracle;
  std::optional<Vec> params;
  std::size_t eval_samples = 1000;
  std::uint64_t eval_seed = 0;
  std::size_t bench_samples = 100;
  int forward_reps = 100;
  double speedup_threshold = 10.0;
};

// `key = value` lines; '#' starts a comment. Unknown keys are rejected.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// Defaults < file < overrides. PENALEARN_SEED supplies the seed when neither
// the file nor the overrides set one. Throws UsageError naming the key and
// its accepted range.
RunConfig parse_config(const std::optional<std::filesystem::path>& file,
                       const std::map<std::string, std::string>& overrides);

// Runs a validated config. Returns the process exit status.
int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Full command line entry point: `penalearn <train|eval|oracle|bench|table> [--config FILE] [--key value ...]`.
// Exit 0 on success, 2 on usage errors, 1 on other failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace penalearn
