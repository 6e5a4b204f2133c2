#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "singhom/config.hpp"
#include "singhom/outcome.hpp"

namespace singhom {

struct RunOptions {
  std::filesystem::path out_dir = "results";
  int threads = 1;
  std::optional<std::uint64_t> seed;  // overrides the config seed
};

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitConfig = 2 };

struct RunRecord {
  std::string name;
  std::string kind;
  int exit_code = kExitPass;
  ExperimentOutcome outcome;
  double wall_seconds = 0.0;
  std::string error;  // config or runtime error text
};

// Runs one experiment and writes its artifacts under out_dir/<name>/.
// Never throws for experiment failures; they end up in the record.
RunRecord run_experiment(const RunConfig& cfg, const RunOptions& opts);

// Appends one JSON object per record to out_dir/results.jsonl (rewritten atomically).
void append_results(const std::filesystem::path& out_dir, const RunRecord& rec);

// Exit code 0 pass, 1 experiment failure, 2 config or usage error.
int run(const std::filesystem::path& config_path, const RunOptions& opts, std::ostream& out, std::ostream& err);

// Manifest: one config path per line (relative to the manifest), '#' comments.
// Writes out_dir/summary.txt. Exit 0 iff every experiment passed.
int suite(const std::filesystem::path& manifest_path, const RunOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace singhom
