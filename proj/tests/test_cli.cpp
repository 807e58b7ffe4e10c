#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "spalab/config.hpp"
#include "spalab/csv.hpp"
#include "spalab/manifest.hpp"

using namespace spalab;
namespace fs = std::filesystem;

namespace {

std::string bin_path() {
    const char* b = std::getenv("SPALAB_BIN");
    REQUIRE_MESSAGE(b != nullptr, "SPALAB_BIN must point at the pipeline binary");
    return b;
}

// fresh scratch directory per test case
fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("spalab_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli_cmd(const std::string& args, const fs::path& dir) {
    fs::path outFile = dir / "stdout.txt";
    fs::path errFile = dir / "stderr.txt";
    std::string cmd = bin_path() + " " + args + " >" + outFile.string() + " 2>" +
                      errFile.string();
    int raw = std::system(cmd.c_str());
    RunResult r;
    REQUIRE(raw != -1);
    REQUIRE(WIFEXITED(raw));
    r.code = WEXITSTATUS(raw);
    r.out = slurp(outFile);
    r.err = slurp(errFile);
    return r;
}

// small calibration that keeps every pipeline stage quick
const char* kSmokeConfig =
    "seed = 1\n"
    "model.lambda = 0.05\n"
    "grid.n_assets = 8\n"
    "grid.n_income = 3\n"
    "grid.n_aime = 2\n"
    "type.count = 2\n"
    "type.0.share = 0.5\n"
    "type.0.unemp_prob = 0.12 0.05 0.02\n"
    "type.1.share = 0.5\n"
    "type.1.unemp_prob = 0.12 0.05 0.02\n"
    "scenario.households_per_cohort = 40\n"
    "scenario.age_end = 70\n";

fs::path write_cfg(const fs::path& dir, const std::string& text) {
    fs::path p = dir / "run.cfg";
    std::ofstream out(p);
    out << text;
    return p;
}

std::string common_flags(const fs::path& cfg, const fs::path& outDir) {
    return "--config " + cfg.string() + " --out " + outDir.string();
}

} // namespace

TEST_CASE("usage errors exit with the config-error code") {
    fs::path dir = scratch("usage");
    CHECK(run_cli_cmd("", dir).code == 2);
    CHECK(run_cli_cmd("--help", dir).code == 0);
    CHECK(run_cli_cmd("frobnicate", dir).code == 2);
    CHECK(run_cli_cmd("solve-re --no-such-flag", dir).code == 2);
}

TEST_CASE("config rejections carry the key path to stderr") {
    fs::path dir = scratch("cfgerr");

    RunResult missing = run_cli_cmd("solve-re --config " + (dir / "absent.cfg").string(), dir);
    CHECK(missing.code == 2);
    CHECK(missing.err.find("absent.cfg") != std::string::npos);

    fs::path bad = write_cfg(dir, "model.gamm = 1\n");
    RunResult unknown = run_cli_cmd("solve-re --config " + bad.string(), dir);
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("model.gamm") != std::string::npos);
    CHECK(unknown.err.find("unknown key") != std::string::npos);

    fs::path incomplete = write_cfg(dir, std::string("type.count = 5\n"));
    RunResult req = run_cli_cmd("solve-re --config " + incomplete.string(), dir);
    CHECK(req.code == 2);
    CHECK(req.err.find("type.4.") != std::string::npos);
    CHECK(req.err.find("missing required key") != std::string::npos);

    fs::path lam = dir / "lambda0.cfg";
    {
        std::ofstream out(lam);
        out << "model.lambda = 0\n";
    }
    RunResult ri = run_cli_cmd("solve-ri --config " + lam.string() + " --out " +
                                   (dir / "out").string(),
                               dir);
    CHECK(ri.code == 2);
    CHECK(ri.err.find("model.lambda") != std::string::npos);
}

TEST_CASE("missing dependency artifacts exit 4 and name the file") {
    fs::path dir = scratch("missing");
    fs::path cfg = write_cfg(dir, kSmokeConfig);
    std::string flags = common_flags(cfg, dir / "out");

    RunResult sim = run_cli_cmd("simulate " + flags, dir);
    CHECK(sim.code == 4);
    CHECK(sim.err.find("solution_re.bin") != std::string::npos);

    RunResult an = run_cli_cmd("analyze " + flags, dir);
    CHECK(an.code == 4);
    CHECK(an.err.find("panel_re.csv") != std::string::npos);
}

TEST_CASE("costless-observation pipeline runs and reruns bit-identically") {
    fs::path dir = scratch("repipe");
    fs::path cfg = write_cfg(dir, kSmokeConfig);
    fs::path out = dir / "out";
    std::string flags = common_flags(cfg, out);

    CHECK(run_cli_cmd("solve-re " + flags, dir).code == 0);
    for (const char* f : {"solution_re.bin", "value_re.csv", "policy_re.csv",
                          "manifest.json"})
        CHECK_MESSAGE(fs::exists(out / f), f);

    CHECK(run_cli_cmd("simulate " + flags, dir).code == 0);
    CHECK(fs::exists(out / "panel_re.csv"));
    CHECK(fs::exists(out / "age_profiles_re.csv"));
    std::uint64_t sumA = fnv1a64_file((out / "panel_re.csv").string());

    CHECK(run_cli_cmd("simulate " + flags, dir).code == 0);
    CHECK(fnv1a64_file((out / "panel_re.csv").string()) == sumA);

    Manifest m = load_manifest((out / "manifest.json").string());
    REQUIRE(m.artifacts.count("panel_re.csv") == 1);
    CHECK(m.artifacts.at("panel_re.csv").checksum == hash_hex(sumA));
    CHECK(m.artifacts.count("solution_re.bin") == 1);
    CHECK(m.seed == 1);
    CHECK(m.configHash == hash_hex(config_hash(load_config(cfg.string()))));

    // another seed moves the panel but not the solution
    std::uint64_t solA = fnv1a64_file((out / "solution_re.bin").string());
    CHECK(run_cli_cmd("simulate " + flags + " --seed 9", dir).code == 0);
    CHECK(fnv1a64_file((out / "panel_re.csv").string()) != sumA);
    CHECK(fnv1a64_file((out / "solution_re.bin").string()) == solA);

    CHECK(run_cli_cmd("simulate " + flags, dir).code == 0);
    CHECK(run_cli_cmd("analyze " + flags, dir).code == 0);
    CHECK(fs::exists(out / "summary_re.csv"));
    CHECK(fs::exists(out / "treatment_re.csv"));
    CHECK(!fs::exists(out / "treatment_compare.csv"));

    Panel panel = read_panel_csv((out / "panel_re.csv").string());
    CHECK(panel.kind == SolveKind::RE);
    CHECK(panel.rows.size() == 3u * 40u * 19u); // cohorts x households x ages 52..70
}

TEST_CASE("a config change makes stored solutions stale") {
    fs::path dir = scratch("stale");
    fs::path cfg = write_cfg(dir, kSmokeConfig);
    fs::path out = dir / "out";
    std::string flags = common_flags(cfg, out);

    CHECK(run_cli_cmd("solve-re " + flags, dir).code == 0);
    write_cfg(dir, std::string(kSmokeConfig) + "model.gamma = 3.0\n");
    RunResult sim = run_cli_cmd("simulate " + flags, dir);
    CHECK(sim.code == 4);
    CHECK(sim.err.find("stale") != std::string::npos);
}

TEST_CASE("attention pipeline writes the comparison and belief artifacts") {
    fs::path dir = scratch("ripipe");
    fs::path cfg = write_cfg(dir, kSmokeConfig);
    fs::path out = dir / "out";
    std::string flags = common_flags(cfg, out);

    CHECK(run_cli_cmd("solve-re " + flags, dir).code == 0);
    CHECK(run_cli_cmd("solve-ri " + flags, dir).code == 0);
    CHECK(fs::exists(out / "solution_ri.bin"));
    CHECK(fs::exists(out / "info_flow_ri.csv"));

    CHECK(run_cli_cmd("simulate " + flags, dir).code == 0);
    CHECK(fs::exists(out / "panel_ri.csv"));
    CHECK(fs::exists(out / "belief_stats_ri.csv"));

    CHECK(run_cli_cmd("analyze " + flags, dir).code == 0);
    for (const char* f : {"summary_ri.csv", "treatment_ri.csv",
                          "treatment_compare.csv", "belief_histogram_ri.csv"})
        CHECK_MESSAGE(fs::exists(out / f), f);

    Panel re = read_panel_csv((out / "panel_re.csv").string());
    Panel ri = read_panel_csv((out / "panel_ri.csv").string());
    REQUIRE(re.rows.size() == ri.rows.size());
    // shared exogenous histories under the common seed
    for (size_t i = 0; i < re.rows.size(); ++i) {
        CHECK(re.rows[i].incomeOffer == ri.rows[i].incomeOffer);
        CHECK(re.rows[i].trueSpa == ri.rows[i].trueSpa);
    }
}

TEST_CASE("oracle-check passes shipped tolerances and fails corrupted ones") {
    fs::path dir = scratch("oracle");
    RunResult ok = run_cli_cmd("oracle-check", dir);
    CHECK(ok.code == 0);
    CHECK(ok.out.find(" pass") != std::string::npos);
    CHECK(ok.out.find("FAIL") == std::string::npos);
    CHECK(ok.out.find("residual") != std::string::npos);

    RunResult bad = run_cli_cmd("oracle-check --oracle-tol 1e-30", dir);
    CHECK(bad.code == 3);
    CHECK(bad.out.find("FAIL") != std::string::npos);
    CHECK(bad.out.find("residual") != std::string::npos);
}
