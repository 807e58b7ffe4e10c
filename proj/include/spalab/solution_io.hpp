#pragma once
#include <cstdint>
#include <string>

#include "spalab/state_space.hpp"

namespace spalab {

// A solution on disk, together with the hash of the config that produced it.
// Callers compare the hash against their own config before trusting the file.
struct SolutionArtifact {
    Solution sol;
    std::uint64_t configHash = 0;
};

// Versioned binary dump: model parameters, grid spec, then the per-age slabs
// with doubles stored as raw bits. The state space is rebuilt on load, so a
// loaded solution is bit-identical to the saved one.
void save_solution(const std::string& path, const Solution& sol,
                   std::uint64_t configHash);

// Throws ArtifactError when the file is missing, truncated, from a different
// format version, or structurally inconsistent.
SolutionArtifact load_solution(const std::string& path);

} // namespace spalab
