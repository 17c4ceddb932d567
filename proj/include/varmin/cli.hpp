#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "varmin/json_io.hpp"
#include "varmin/problem.hpp"

namespace varmin {

enum ExitCode : int { kExitOk = 0, kExitQualified = 1, kExitSpec = 2, kExitEval = 3 };

struct CommandOptions {
  std::string spec_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;  // overrides the spec's seed
  bool timestamp = true;
  bool verbose = false;               // also writes trace.csv
};

// What a command produces before anything touches the filesystem.
struct CommandOutput {
  int exit_code = kExitOk;
  json report;
  std::map<std::string, std::string> files;  // extra outputs, name -> contents
  std::string summary;                       // one line for stdout
};

CommandOutput cmd_check(const ProblemSpec& spec);
CommandOutput cmd_minimize(const ProblemSpec& spec, bool verbose);
CommandOutput cmd_semicont(const ProblemSpec& spec);
CommandOutput cmd_lemma_apim(const ProblemSpec& spec);

// Loads the spec, runs `command` ("check", "minimize", "semicont",
// "lemma-apim"), writes report.json and the extra files to out_dir and
// returns the exit code. Diagnostics go to stderr.
int run_command(const std::string& command, const CommandOptions& opts);

// Full argv entry point.
int run_cli(int argc, char** argv);

}  // namespace varmin
