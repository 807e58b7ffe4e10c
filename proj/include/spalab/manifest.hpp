#pragma once
#include <cstdint>
#include <map>
#include <string>

namespace spalab {

// Reproducibility record written next to the artifacts. Checksums cover the
// artifact bytes, so a rerun with the same config and seed must reproduce
// them; wall-clock timings are informational and excluded from that contract.
struct Manifest {
    static constexpr const char* kToolVersion = "spalab 1.0.0";

    struct Entry {
        std::uint64_t bytes = 0;
        std::string checksum; // FNV-1a 64 over the file, hex
    };

    std::string configHash; // hex
    std::uint64_t seed = 0;
    std::string tool = kToolVersion;
    std::map<std::string, Entry> artifacts; // file name within the output dir
    std::map<std::string, double> timingsSec; // per subcommand
};

std::uint64_t fnv1a64_file(const std::string& path); // ArtifactError when unreadable

// Checksums outDir/name and records it under `name`.
void record_artifact(Manifest& m, const std::string& outDir, const std::string& name);

void save_manifest(const std::string& path, const Manifest& m);
Manifest load_manifest(const std::string& path); // ArtifactError when missing/malformed

} // namespace spalab
