#include "spalab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "spalab/beliefs.hpp"
#include "spalab/config.hpp"
#include "spalab/csv.hpp"
#include "spalab/econometrics.hpp"
#include "spalab/errors.hpp"
#include "spalab/manifest.hpp"
#include "spalab/re_solver.hpp"
#include "spalab/ri_oracles.hpp"
#include "spalab/ri_solver.hpp"
#include "spalab/simulate.hpp"
#include "spalab/solution_io.hpp"

namespace spalab {

namespace {

// ============================================================================
// verification suite
// ============================================================================

ModelParams oracle_base() {
    ModelParams p;
    p.gamma = 1.5;
    p.nu = 0.4;
    p.beta = 0.96;
    p.theta = 0.05;
    p.bequestShift = 2000.0;
    p.lambda = 0.0;
    p.r = 0.03;
    p.workHours = 0.35;
    p.benefit = 800.0;
    p.statePension = 1500.0;
    p.spouseIncome = 2000.0;
    p.pSpaStep = 0.3;
    p.spaInit = 60;
    p.spaCap = 62;
    p.ageStart = 60;
    p.ageWorkEnd = 62;
    p.ageDeath = 63;
    p.ageSpouseRetire = 62;
    p.ageEntry = 40;
    p.spouseAgeOffset = 0;
    p.aimeFreezeAge = 52; // career average inert, as the enumeration assumes
    p.db = {0.10, 0.0};

    TypeProfile t;
    t.label = "oracle";
    t.hasDB = false;
    t.delta0 = 7.3;
    t.delta1 = 0.0;
    t.delta2 = 0.0;
    t.rho = 0.5;
    t.sigmaEps = 0.3;
    t.sigmaInit = 0.3;
    t.unempProb = {0.10, 0.05};
    t.share = 1.0;
    p.types = {t};

    p.mortality.firstStochasticAge = 60;
    p.mortality.ageDeath = 63;
    p.mortality.survival = {0.95, 0.90, 0.85};
    return p;
}

GridSpec oracle_grids() {
    GridSpec gs;
    gs.nAssets = 3;
    gs.assetMin = 0.0;
    gs.assetMax = 10000.0;
    gs.assetCurv = 1.0;
    gs.nAime = 2;
    gs.aimeMin = 0.0;
    gs.aimeMax = 20000.0;
    gs.aimeCurv = 1.0;
    gs.nIncome = 2;
    return gs;
}

// every start state at the instance's first age, every valid slot
std::vector<BruteForceStart> all_starts(const StateSpace& ss) {
    std::vector<BruteForceStart> out;
    int age = ss.params.ageStart;
    auto push = [&](int spa, bool recv) {
        for (int a = 0; a < ss.nA(); ++a)
            for (int y = 0; y < ss.nY(); ++y)
                for (int m = 0; m < ss.nM(); ++m)
                    for (int u = 0; u <= 1; ++u)
                        out.push_back({age, 0, a, y, m, u, spa, recv});
    };
    if (ss.slot_valid(age, StateSpace::kReceiving)) push(ss.params.spaInit, true);
    for (int slot = 1; slot < ss.nSlots(); ++slot)
        if (ss.slot_valid(age, slot)) push(ss.spa_of_slot(slot), false);
    return out;
}

double re_instance_residual(const ModelParams& p) {
    StateSpace ss = make_state_space(p, oracle_grids());
    SolutionRE sol = solve_re(ss);
    double worst = 0.0;
    for (const BruteForceStart& s0 : all_starts(ss)) {
        int slot = s0.receiving ? StateSpace::kReceiving : ss.slot_of_spa(s0.spa);
        int w = ss.widx(s0.type, s0.a, s0.y, s0.m, s0.u);
        double diff = std::abs(sol.value(s0.age, slot, w) - brute_force_value(ss, s0));
        worst = std::max(worst, diff);
    }
    return worst;
}

std::vector<std::pair<std::string, ModelParams>> re_instances() {
    std::vector<std::pair<std::string, ModelParams>> out;
    out.emplace_back("walk-mortality", oracle_base());

    ModelParams fixed = oracle_base();
    fixed.pSpaStep = 0.0;
    out.emplace_back("fixed-spa", fixed);

    ModelParams db = oracle_base();
    db.types[0].hasDB = true;
    out.emplace_back("db-pension", db);

    ModelParams certain = oracle_base();
    certain.mortality.survival = {1.0, 1.0, 1.0};
    certain.spouseAgeOffset = 1;
    certain.r = 0.05;
    out.emplace_back("certain-life", certain);

    ModelParams curv = oracle_base();
    curv.gamma = 3.0;
    curv.theta = 0.3;
    curv.benefit = 1200.0;
    curv.pSpaStep = 0.5;
    out.emplace_back("high-curvature", curv);
    return out;
}

// Gibbs rule implied by a default rule q: p(d|s) ~ q(d) exp(z(s,d)/lambda)
std::vector<double> gibbs_rule(const std::vector<double>& z, int nS, int nD,
                               double lambda, const std::vector<double>& q) {
    std::vector<double> p(static_cast<size_t>(nS) * nD, 0.0);
    for (int s = 0; s < nS; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        for (int d = 0; d < nD; ++d) {
            double t = std::log(q[d]) + z[s * nD + d] / lambda;
            best = std::max(best, t);
        }
        double norm = 0.0;
        for (int d = 0; d < nD; ++d) {
            double t = std::log(q[d]) + z[s * nD + d] / lambda;
            p[s * nD + d] = std::exp(t - best);
            norm += p[s * nD + d];
        }
        for (int d = 0; d < nD; ++d) p[s * nD + d] /= norm;
    }
    return p;
}

} // namespace

std::vector<OracleCheck> run_oracle_suite(double tolOverride) {
    std::vector<OracleCheck> checks;
    auto tol = [&](double builtin) { return tolOverride > 0.0 ? tolOverride : builtin; };

    for (const auto& [name, params] : re_instances()) {
        OracleCheck c;
        c.name = "re-enumeration/" + name;
        c.residual = re_instance_residual(params);
        c.tol = tol(1e-10);
        c.pass = c.residual <= c.tol;
        checks.push_back(c);
    }

    for (const AttentionInstance& inst : canned_attention_instances()) {
        BAResult ba = ba_fixed_point(inst.z, inst.nS, inst.nD, inst.mu, inst.lambda);
        DualScanResult scan =
            attention_dual_scan(inst.z, inst.nS, inst.nD, inst.mu, inst.lambda);

        double vBA = 0.0;
        for (int s = 0; s < inst.nS; ++s) vBA += inst.mu[s] * ba.v[s];
        OracleCheck cv;
        cv.name = "attention-dual/" + inst.name + "-value";
        cv.residual = std::abs(vBA - scan.value);
        cv.tol = tol(1e-6);
        cv.pass = cv.residual <= cv.tol;
        checks.push_back(cv);

        std::vector<double> pScan =
            gibbs_rule(inst.z, inst.nS, inst.nD, inst.lambda, scan.q);
        double worst = 0.0;
        for (size_t i = 0; i < pScan.size(); ++i)
            worst = std::max(worst, std::abs(pScan[i] - ba.p[i]));
        OracleCheck cp;
        cp.name = "attention-dual/" + inst.name + "-probs";
        cp.residual = worst;
        cp.tol = tol(1e-4);
        cp.pass = cp.residual <= cp.tol;
        checks.push_back(cp);
    }

    {
        // 2x2 ladder: more expensive attention must carry less information
        const int nS = 2, nD = 2;
        const std::vector<double> mu = {0.6, 0.4};
        const std::vector<double> z = {1.0, 0.0, 0.0, 1.0};
        std::vector<double> lambdas = {0.01, 0.1, 1.0, 10.0};
        std::vector<double> info;
        for (double lam : lambdas) {
            BAResult ba = ba_fixed_point(z, nS, nD, mu, lam);
            info.push_back(mutual_information(ba.p, ba.q, mu, nS, nD));
        }
        double worstRise = 0.0;
        for (size_t i = 1; i < info.size(); ++i)
            worstRise = std::max(worstRise, info[i] - info[i - 1]);
        OracleCheck mono;
        mono.name = "lambda-ladder/monotone";
        mono.residual = std::max(worstRise, 0.0);
        mono.tol = tol(1e-12);
        mono.pass = mono.residual <= mono.tol;
        checks.push_back(mono);

        OracleCheck strict;
        strict.name = "lambda-ladder/strict-drop";
        strict.residual = info.front() - info.back();
        strict.tol = 1e-9;
        strict.wantAtMost = false;
        strict.pass = strict.residual >= strict.tol;
        checks.push_back(strict);
    }
    return checks;
}

namespace {

// ============================================================================
// pipeline stages
// ============================================================================

struct Stage {
    RunConfig cfg;
    int workers = 0;
    std::ostream* out = nullptr;

    std::string path(const std::string& name) const { return cfg.outDir + "/" + name; }
    SolveOptions solve_opts() const {
        SolveOptions so;
        so.workers = workers;
        so.parallel = true;
        return so;
    }
};

Manifest open_manifest(const Stage& st) {
    const std::string path = st.path("manifest.json");
    const std::string hex = hash_hex(config_hash(st.cfg));
    if (std::filesystem::exists(path)) {
        try {
            Manifest m = load_manifest(path);
            if (m.configHash == hex && m.seed == st.cfg.seed) {
                m.tool = Manifest::kToolVersion;
                return m;
            }
        } catch (const ArtifactError&) {
            // unreadable manifest: rebuild it
        }
    }
    Manifest m;
    m.configHash = hex;
    m.seed = st.cfg.seed;
    return m;
}

class StageTimer {
  public:
    StageTimer(Manifest& m, std::string name)
        : m_(m), name_(std::move(name)), t0_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0_;
        m_.timingsSec[name_] = dt.count();
    }

  private:
    Manifest& m_;
    std::string name_;
    std::chrono::steady_clock::time_point t0_;
};

void ensure_out_dir(const Stage& st) {
    std::error_code ec;
    std::filesystem::create_directories(st.cfg.outDir, ec);
    if (ec)
        throw ArtifactError("cannot create output directory '" + st.cfg.outDir +
                            "': " + ec.message());
}

std::string kind_tag(SolveKind k) { return k == SolveKind::RE ? "re" : "ri"; }

void cmd_solve(const Stage& st, SolveKind kind) {
    if (kind == SolveKind::RI && !(st.cfg.params.lambda > 0.0))
        throw ConfigError("model.lambda", "the attention solve needs lambda > 0");

    ensure_out_dir(st);
    Manifest m = open_manifest(st);
    const std::string tag = kind_tag(kind);
    {
        StageTimer timer(m, "solve-" + tag);
        StateSpace ss = make_state_space(st.cfg.params, st.cfg.grids);
        Solution sol = kind == SolveKind::RE ? solve_re(ss, st.solve_opts())
                                             : solve_ri(ss, st.solve_opts());
        save_solution(st.path("solution_" + tag + ".bin"), sol, config_hash(st.cfg));
        write_value_csv(st.path("value_" + tag + ".csv"), sol);
        write_policy_csv(st.path("policy_" + tag + ".csv"), sol);
        record_artifact(m, st.cfg.outDir, "solution_" + tag + ".bin");
        record_artifact(m, st.cfg.outDir, "value_" + tag + ".csv");
        record_artifact(m, st.cfg.outDir, "policy_" + tag + ".csv");
        if (kind == SolveKind::RI) {
            write_info_flow_csv(st.path("info_flow_ri.csv"), sol);
            record_artifact(m, st.cfg.outDir, "info_flow_ri.csv");
        }
        *st.out << "[solve-" << tag << "] " << ss.n_ages() << " ages, " << ss.nW()
                << " W-points per slot; wrote solution_" << tag << ".bin\n";
    }
    save_manifest(st.path("manifest.json"), m);
}

// loads a solution artifact and refuses one solved under another config
SolutionArtifact load_checked(const Stage& st, SolveKind kind) {
    const std::string name = "solution_" + kind_tag(kind) + ".bin";
    SolutionArtifact art = load_solution(st.path(name));
    if (art.sol.kind != kind)
        throw ArtifactError("solution file '" + st.path(name) +
                            "' holds the wrong solution kind");
    if (art.configHash != config_hash(st.cfg))
        throw ArtifactError("stale solution '" + st.path(name) +
                            "': config hash mismatch, re-run solve-" + kind_tag(kind));
    return art;
}

void cmd_simulate(const Stage& st) {
    ensure_out_dir(st);
    Manifest m = open_manifest(st);
    {
        StageTimer timer(m, "simulate");
        bool any = false;
        for (SolveKind kind : {SolveKind::RE, SolveKind::RI}) {
            const std::string tag = kind_tag(kind);
            if (!std::filesystem::exists(st.path("solution_" + tag + ".bin")))
                continue;
            any = true;
            SolutionArtifact art = load_checked(st, kind);
            ScenarioSpec sc = st.cfg.scenario;
            sc.kind = kind;
            sc.seed = st.cfg.seed;
            Panel panel = simulate_panel(art.sol, sc, st.solve_opts());
            write_panel_csv(st.path("panel_" + tag + ".csv"), panel);
            write_age_profiles_csv(st.path("age_profiles_" + tag + ".csv"),
                                   age_profiles(panel));
            record_artifact(m, st.cfg.outDir, "solution_" + tag + ".bin");
            record_artifact(m, st.cfg.outDir, "panel_" + tag + ".csv");
            record_artifact(m, st.cfg.outDir, "age_profiles_" + tag + ".csv");
            if (kind == SolveKind::RI) {
                BeliefErrorStats bs = belief_error_stats(panel_belief_obs(panel));
                write_belief_stats_csv(st.path("belief_stats_ri.csv"), bs);
                record_artifact(m, st.cfg.outDir, "belief_stats_ri.csv");
            }
            *st.out << "[simulate] panel_" << tag << ".csv: " << panel.rows.size()
                    << " rows, "
                    << panel.householdsPerCohort *
                           static_cast<int>(panel.cohortLabels.size())
                    << " households\n";
        }
        if (!any)
            throw ArtifactError("missing solution file '" +
                                st.path("solution_re.bin") +
                                "' (run solve-re or solve-ri first)");
    }
    save_manifest(st.path("manifest.json"), m);
}

// treatment table for one panel: whole population and above-median wealth
std::vector<TreatmentCell> single_panel_cells(const Panel& panel,
                                              RegressionSpec spec,
                                              const std::string& label) {
    std::vector<TreatmentCell> cells;
    for (Subpopulation pop :
         {Subpopulation::All, Subpopulation::AboveMedianAssetsAtSpaMinus1}) {
        spec.subpopulation = pop;
        Design d = build_design(panel, spec);
        RegressionResult r = ols_cluster(d);
        int j = r.find("treatment");
        TreatmentCell c;
        c.panel = label;
        c.population = pop == Subpopulation::All ? "all" : "above_median";
        c.nObs = r.nObs;
        c.nClusters = r.nClusters;
        c.effect = r.coef[j];
        c.se = r.se[j];
        c.z = r.z[j];
        c.p = r.p[j];
        cells.push_back(c);
    }
    return cells;
}

void cmd_analyze(const Stage& st) {
    ensure_out_dir(st);
    Manifest m = open_manifest(st);
    {
        StageTimer timer(m, "analyze");
        std::vector<Panel> panels;
        for (SolveKind kind : {SolveKind::RE, SolveKind::RI}) {
            const std::string tag = kind_tag(kind);
            const std::string name = "panel_" + tag + ".csv";
            if (!std::filesystem::exists(st.path(name))) continue;
            Panel panel = read_panel_csv(st.path(name));
            if (panel.kind != kind)
                throw ArtifactError("panel file '" + st.path(name) +
                                    "' holds the wrong panel kind");
            panels.push_back(std::move(panel));
        }
        if (panels.empty())
            throw ArtifactError("missing panel file '" + st.path("panel_re.csv") +
                                "' (run simulate first)");

        const std::vector<std::string> vars = {"assets", "consumption",
                                               "income_offer", "aime",
                                               "next_assets"};
        for (const Panel& panel : panels) {
            const std::string tag = kind_tag(panel.kind);
            std::vector<std::pair<std::string, SummaryStats>> rows;
            for (const std::string& v : vars)
                rows.emplace_back(v, summary_stats(panel, v));
            write_summary_csv(st.path("summary_" + tag + ".csv"), rows);
            record_artifact(m, st.cfg.outDir, "summary_" + tag + ".csv");

            std::vector<TreatmentCell> cells =
                single_panel_cells(panel, st.cfg.regression, tag);
            write_treatment_csv(st.path("treatment_" + tag + ".csv"), cells);
            record_artifact(m, st.cfg.outDir, "treatment_" + tag + ".csv");
            *st.out << "[analyze] treatment_" << tag
                    << ".csv: whole-population effect "
                    << format_double(cells[0].effect) << " (se "
                    << format_double(cells[0].se) << ")\n";

            if (panel.kind == SolveKind::RI) {
                BeliefErrorStats bs = belief_error_stats(panel_belief_obs(panel));
                write_belief_histogram_csv(st.path("belief_histogram_ri.csv"), bs);
                record_artifact(m, st.cfg.outDir, "belief_histogram_ri.csv");
            }
        }
        if (panels.size() == 2) {
            std::vector<TreatmentCell> cells =
                treatment_report(panels[0], panels[1], st.cfg.regression);
            write_treatment_csv(st.path("treatment_compare.csv"), cells);
            record_artifact(m, st.cfg.outDir, "treatment_compare.csv");
            *st.out << "[analyze] treatment_compare.csv: above-median effects re "
                    << format_double(cells[1].effect) << " vs ri "
                    << format_double(cells[3].effect) << "\n";
        }
    }
    save_manifest(st.path("manifest.json"), m);
}

int cmd_oracle_check(const Stage& st, double tolOverride) {
    std::vector<OracleCheck> checks = run_oracle_suite(tolOverride);
    int failed = 0;
    for (const OracleCheck& c : checks) {
        *st.out << "[oracle] " << c.name << " residual " << format_double(c.residual)
                << (c.wantAtMost ? " tol " : " needs >= ") << format_double(c.tol)
                << (c.pass ? " pass" : " FAIL") << "\n";
        if (!c.pass) ++failed;
    }
    *st.out << "[oracle] " << (checks.size() - static_cast<size_t>(failed)) << "/"
            << checks.size() << " checks within tolerance\n";
    return failed == 0 ? 0 : 3;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"life-cycle pension model: solve, simulate, analyze"};
    app.require_subcommand(1);

    std::string configPath;
    std::string outDir;
    std::uint64_t seed = 0;
    int workers = 0;
    double oracleTol = 0.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", configPath, "config file (defaults built in)");
        sub->add_option("--out", outDir, "output directory (overrides output.dir)");
        sub->add_option("--seed", seed, "RNG seed (overrides the config seed)");
        sub->add_option("--workers", workers,
                        "worker threads, 0 = available parallelism");
    };
    CLI::App* solveRe = app.add_subcommand("solve-re", "solve under costless SPA observation");
    CLI::App* solveRi = app.add_subcommand("solve-ri", "solve under costly SPA attention");
    CLI::App* simulate = app.add_subcommand("simulate", "simulate panels from stored solutions");
    CLI::App* analyze = app.add_subcommand("analyze", "summaries, regressions and belief tables");
    CLI::App* oracle = app.add_subcommand("oracle-check", "run the verification suite");
    CLI::App* all = app.add_subcommand("all", "full pipeline plus verification");
    for (CLI::App* sub : {solveRe, solveRi, simulate, analyze, oracle, all})
        add_common(sub);
    for (CLI::App* sub : {oracle, all})
        sub->add_option("--oracle-tol", oracleTol,
                        "override every verification tolerance (dev knob)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        Stage st;
        st.cfg = configPath.empty() ? default_config() : load_config(configPath);
        CLI::App* sub = app.get_subcommands().front();
        if (sub->count("--seed")) st.cfg.seed = seed;
        if (sub->count("--out")) st.cfg.outDir = outDir;
        st.workers = workers;
        st.out = &out;

        if (sub == solveRe) {
            cmd_solve(st, SolveKind::RE);
        } else if (sub == solveRi) {
            cmd_solve(st, SolveKind::RI);
        } else if (sub == simulate) {
            cmd_simulate(st);
        } else if (sub == analyze) {
            cmd_analyze(st);
        } else if (sub == oracle) {
            return cmd_oracle_check(st, oracleTol);
        } else {
            cmd_solve(st, SolveKind::RE);
            cmd_solve(st, SolveKind::RI);
            cmd_simulate(st);
            cmd_analyze(st);
            return cmd_oracle_check(st, oracleTol);
        }
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const RankError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const ArtifactError& e) {
        err << "artifact error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace spalab
