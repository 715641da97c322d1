#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "jumphk/estimators.hpp"
#include "jumphk/grid.hpp"
#include "jumphk/model.hpp"

namespace jumphk {

// config file rejected: unknown key, wrong type, bad range, unknown claim id
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
  ModelSpec model;
  GridSpec grid;
  McParams mc;  // carries seed and workers
  std::vector<std::string> claims;
  std::string output_dir = "out";
};

// Strict parse of the versioned schema (version = 1). Unknown keys anywhere
// are rejected. Structural model errors surface as ConfigError too; the
// statistical assumption validators live in the runner, not here.
ExperimentConfig parse_config(const std::string& json_text);

// FNV-1a over the canonical form: key-sorted JSON with "workers" and
// "output_dir" removed, so the digest names the experiment, not the machine.
std::uint64_t config_digest(const std::string& json_text);
std::string digest_hex(std::uint64_t);

// claims that draw Monte Carlo paths and therefore need n_paths >= 1000
bool claim_is_statistical(const std::string& id);

}  // namespace jumphk
