#pragma once
#include <cstdint>
#include <string>

#include "spalab/econometrics.hpp"
#include "spalab/params.hpp"
#include "spalab/simulate.hpp"
#include "spalab/state_space.hpp"

namespace spalab {

// Everything a run needs, resolved against the built-in defaults. The survival
// table is part of the shipped calibration and is not configurable. Scenario
// kind and seed are filled in by the caller (the seed lives at the top level
// so one value covers every stage).
struct RunConfig {
    ModelParams params;
    GridSpec grids;
    ScenarioSpec scenario;
    RegressionSpec regression;
    std::string outDir = "out";
    std::uint64_t seed = 1;
};

RunConfig default_config();

// Flat `key = value` text with '#' comments. Unknown keys, duplicate keys,
// malformed values, missing required keys for added types and out-of-range
// settings all throw ConfigError naming the key path. The resolved config is
// defaults overridden by the file.
RunConfig parse_config(const std::string& text);

// parse_config over the file's contents; missing file throws ConfigError.
RunConfig load_config(const std::string& path);

// Canonical text form: every key in schema order with shortest round-trip
// numbers. parse_config(dump_config(c)) resolves to an identical dump.
std::string dump_config(const RunConfig& c);

// FNV-1a 64 over the canonical dump without the seed and output.dir lines
// (those never change what a solve produces); the manifest and the solution
// artifacts store it so later stages can refuse stale inputs.
std::uint64_t config_hash(const RunConfig& c);
std::string hash_hex(std::uint64_t h);

} // namespace spalab
