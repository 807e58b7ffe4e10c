#include "spalab/manifest.hpp"

#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "spalab/config.hpp"
#include "spalab/errors.hpp"

namespace spalab {

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot read '" + path + "'");
    std::uint64_t h = 0xcbf29ce484222325ull;
    std::vector<char> buf(1 << 16);
    for (;;) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[static_cast<size_t>(i)]);
            h *= 0x100000001b3ull;
        }
        if (got < static_cast<std::streamsize>(buf.size())) break;
    }
    if (in.bad()) throw ArtifactError("read failed for '" + path + "'");
    return h;
}

void record_artifact(Manifest& m, const std::string& outDir, const std::string& name) {
    const std::string path = outDir + "/" + name;
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw ArtifactError("cannot read '" + path + "'");
    Manifest::Entry e;
    e.bytes = static_cast<std::uint64_t>(in.tellg());
    in.close();
    e.checksum = hash_hex(fnv1a64_file(path));
    m.artifacts[name] = e;
}

void save_manifest(const std::string& path, const Manifest& m) {
    nlohmann::json j;
    j["config_hash"] = m.configHash;
    j["seed"] = m.seed;
    j["tool"] = m.tool;
    nlohmann::json arts = nlohmann::json::object();
    for (const auto& [name, e] : m.artifacts)
        arts[name] = {{"bytes", e.bytes}, {"fnv1a64", e.checksum}};
    j["artifacts"] = arts;
    nlohmann::json times = nlohmann::json::object();
    for (const auto& [stage, sec] : m.timingsSec) times[stage] = sec;
    j["timings_sec"] = times;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArtifactError("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
    out.flush();
    if (!out) throw ArtifactError("write failed for '" + path + "'");
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("missing manifest '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
        Manifest m;
        m.configHash = j.at("config_hash").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.tool = j.at("tool").get<std::string>();
        for (const auto& [name, e] : j.at("artifacts").items()) {
            Manifest::Entry entry;
            entry.bytes = e.at("bytes").get<std::uint64_t>();
            entry.checksum = e.at("fnv1a64").get<std::string>();
            m.artifacts[name] = entry;
        }
        for (const auto& [stage, sec] : j.at("timings_sec").items())
            m.timingsSec[stage] = sec.get<double>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ArtifactError("malformed manifest '" + path + "': " + e.what());
    }
}

} // namespace spalab
