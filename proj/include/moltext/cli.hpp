//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_CLI_HPP_
#define MOLTEXT_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"

namespace moltext {

// Flag-level overrides applied on top of the config file.
struct CliOverrides {
  std::optional<uint64_t> seed;
  std::optional<bool> deterministic;
  std::optional<std::string> out_dir;
};

// What every command leaves behind in <out_dir>/manifest.json: the effective
// config (after overrides), content hashes of everything read and written,
// and the wall time.  Rerunning the command with the recorded config must
// reproduce the output hashes.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::map<std::string, std::string> input_hashes;
  std::map<std::string, std::string> output_hashes;
  uint64_t seed = 0;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json &doc);
};

// Strict parse: the file must be a JSON object.
nlohmann::json load_config(const std::filesystem::path &path);

// Runs one subcommand.  `command` is the CLI spelling ("build-corpus").
// Unknown config keys are rejected; a seed is mandatory after overrides.
RunManifest run_command(const std::string &command,
                        const nlohmann::json &config,
                        const CliOverrides &overrides = {});

// Markdown reference for every config key, per command.
std::string config_reference();

// Full argv entry point: parses flags, dispatches, maps Error codes to the
// process exit status.
int cli_main(int argc, char **argv);

}  // namespace moltext

#endif  // MOLTEXT_CLI_HPP_
