#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "topicreg/lda.hpp"
#include "topicreg/textproc.hpp"

namespace topicreg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

inline constexpr const char* kOutEnv = "TOPICREG_OUT";

struct RunConfig {
  std::optional<std::filesystem::path> tweets, snapshots, debates;
  std::string timezone = "+00:00";
  int max_staleness_hours = 48;
  TokenizerConfig tokenizer;
  LdaConfig lda;
  int baseline_topic = 0;
  int baseline_hour = 0;
  bool hour_controls = true;
  int kmin = 2;
  int kmax = 9;
  unsigned threads = 0;  // 0: hardware concurrency
  std::optional<double> holdout;
  int repeats = 1;  // sweep runs with base seeds lda.seed, lda.seed + 1, ...
  std::string preset = "campaign";
  std::uint64_t synth_seed = 2015;
  std::map<int, std::string> topic_labels;
  std::string format = "text";
  std::filesystem::path out = "out";
};

nlohmann::json to_json(const RunConfig& cfg);
/// Overlays the keys present in `j` onto `cfg`; unknown keys are a UsageError.
void apply_json(const nlohmann::json& j, RunConfig& cfg);

/// Runs one subcommand. `args` excludes the program name. Returns an exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

}  // namespace topicreg::cli
