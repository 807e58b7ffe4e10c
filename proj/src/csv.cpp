#include "spalab/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "spalab/errors.hpp"
#include "spalab/ri_solver.hpp"

namespace spalab {

std::string format_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, p);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArtifactError("cannot write '" + path + "'");
    return out;
}

void close_out(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw ArtifactError("write failed for '" + path + "'");
}

const char* kPanelHeader =
    "household_id,cohort,age,type_id,assets,income_offer,unemployed,worked,"
    "consumption,aime,next_assets,receiving,true_spa,belief_mode,belief_mode_prob";

[[noreturn]] void bad_panel(const std::string& path, const std::string& what) {
    throw ArtifactError("panel file '" + path + "': " + what);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t b = 0;
    for (;;) {
        size_t e = s.find(sep, b);
        if (e == std::string::npos) {
            out.push_back(s.substr(b));
            return out;
        }
        out.push_back(s.substr(b, e - b));
        b = e + 1;
    }
}

} // namespace

void write_panel_csv(const std::string& path, const Panel& panel) {
    std::ofstream out = open_out(path);
    out << "# seed = " << panel.seed << "\n";
    out << "# kind = " << (panel.kind == SolveKind::RE ? "re" : "ri") << "\n";
    out << "# households_per_cohort = " << panel.householdsPerCohort << "\n";
    out << "# cohort_labels = ";
    for (size_t i = 0; i < panel.cohortLabels.size(); ++i) {
        const std::string& lbl = panel.cohortLabels[i];
        if (lbl.empty() || lbl.find_first_of(", \t\r\n") != std::string::npos)
            throw ArtifactError("cohort label '" + lbl + "' cannot be stored in '" +
                                path + "'");
        out << (i ? "," : "") << lbl;
    }
    out << "\n" << kPanelHeader << "\n";
    for (const PanelRecord& r : panel.rows) {
        out << r.householdId << ',' << r.cohort << ',' << r.age << ',' << r.typeId
            << ',' << format_double(r.assets) << ',' << format_double(r.incomeOffer)
            << ',' << int(r.unemployed) << ',' << int(r.worked) << ','
            << format_double(r.consumption) << ',' << format_double(r.aime) << ','
            << format_double(r.nextAssets) << ',' << int(r.receiving) << ','
            << r.trueSpa << ',' << r.beliefMode << ','
            << format_double(r.beliefModeProb) << "\n";
    }
    close_out(out, path);
}

namespace {

long parse_csv_long(const std::string& path, const std::string& tok) {
    long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        bad_panel(path, "bad integer field '" + tok + "'");
    return v;
}

double parse_csv_double(const std::string& path, const std::string& tok) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        bad_panel(path, "bad numeric field '" + tok + "'");
    return v;
}

bool parse_csv_bool(const std::string& path, const std::string& tok) {
    if (tok == "0") return false;
    if (tok == "1") return true;
    bad_panel(path, "bad flag field '" + tok + "'");
}

} // namespace

Panel read_panel_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("missing panel file '" + path + "'");

    Panel panel;
    bool haveSeed = false, haveKind = false, havePer = false, haveLabels = false;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("# ", 0) != 0) break;
        size_t eq = line.find('=');
        if (eq == std::string::npos) bad_panel(path, "malformed metadata line");
        std::string key = line.substr(2, eq - 2);
        while (!key.empty() && key.back() == ' ') key.pop_back();
        std::string val = line.substr(eq + 1);
        while (!val.empty() && val.front() == ' ') val.erase(val.begin());
        if (key == "seed") {
            std::uint64_t s = 0;
            auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), s);
            if (ec != std::errc() || p != val.data() + val.size())
                bad_panel(path, "bad seed '" + val + "'");
            panel.seed = s;
            haveSeed = true;
        } else if (key == "kind") {
            if (val == "re") panel.kind = SolveKind::RE;
            else if (val == "ri") panel.kind = SolveKind::RI;
            else bad_panel(path, "bad kind '" + val + "'");
            haveKind = true;
        } else if (key == "households_per_cohort") {
            panel.householdsPerCohort = static_cast<int>(parse_csv_long(path, val));
            havePer = true;
        } else if (key == "cohort_labels") {
            panel.cohortLabels = split(val, ',');
            haveLabels = true;
        } else {
            bad_panel(path, "unknown metadata key '" + key + "'");
        }
    }
    if (!haveSeed || !haveKind || !havePer || !haveLabels)
        bad_panel(path, "missing metadata (seed/kind/households_per_cohort/cohort_labels)");
    if (line != kPanelHeader) bad_panel(path, "unexpected header");

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f = split(line, ',');
        if (f.size() != 15) bad_panel(path, "expected 15 fields, got row '" + line + "'");
        PanelRecord r;
        r.householdId = static_cast<int>(parse_csv_long(path, f[0]));
        r.cohort = static_cast<int>(parse_csv_long(path, f[1]));
        r.age = static_cast<int>(parse_csv_long(path, f[2]));
        r.typeId = static_cast<int>(parse_csv_long(path, f[3]));
        r.assets = parse_csv_double(path, f[4]);
        r.incomeOffer = parse_csv_double(path, f[5]);
        r.unemployed = parse_csv_bool(path, f[6]);
        r.worked = parse_csv_bool(path, f[7]);
        r.consumption = parse_csv_double(path, f[8]);
        r.aime = parse_csv_double(path, f[9]);
        r.nextAssets = parse_csv_double(path, f[10]);
        r.receiving = parse_csv_bool(path, f[11]);
        r.trueSpa = static_cast<int>(parse_csv_long(path, f[12]));
        r.beliefMode = static_cast<int>(parse_csv_long(path, f[13]));
        r.beliefModeProb = parse_csv_double(path, f[14]);
        panel.rows.push_back(r);
    }
    for (const PanelRecord& r : panel.rows)
        if (r.cohort < 0 || r.cohort >= static_cast<int>(panel.cohortLabels.size()))
            bad_panel(path, "cohort index outside the label list");
    return panel;
}

void write_age_profiles_csv(const std::string& path,
                            const std::vector<AgeProfileRow>& rows) {
    std::ofstream out = open_out(path);
    out << "age,participation_rate,mean_assets,n\n";
    for (const AgeProfileRow& r : rows)
        out << r.age << ',' << format_double(r.participationRate) << ','
            << format_double(r.meanAssets) << ',' << r.n << "\n";
    close_out(out, path);
}

void write_summary_csv(const std::string& path,
                       const std::vector<std::pair<std::string, SummaryStats>>& rows) {
    std::ofstream out = open_out(path);
    out << "variable,n,mean,sd,skewness,kurtosis";
    for (int p : kPercentilePoints) out << ",p" << p;
    out << "\n";
    for (const auto& [name, st] : rows) {
        out << name << ',' << st.n << ',' << format_double(st.mean) << ','
            << format_double(st.sd) << ',' << format_double(st.skewness) << ','
            << format_double(st.kurtosis);
        for (double q : st.percentiles) out << ',' << format_double(q);
        out << "\n";
    }
    close_out(out, path);
}

void write_treatment_csv(const std::string& path,
                         const std::vector<TreatmentCell>& cells) {
    std::ofstream out = open_out(path);
    out << "panel,population,n_obs,n_clusters,effect,se,z,p\n";
    for (const TreatmentCell& c : cells)
        out << c.panel << ',' << c.population << ',' << c.nObs << ',' << c.nClusters
            << ',' << format_double(c.effect) << ',' << format_double(c.se) << ','
            << format_double(c.z) << ',' << format_double(c.p) << "\n";
    close_out(out, path);
}

void write_belief_stats_csv(const std::string& path, const BeliefErrorStats& st) {
    std::ofstream out = open_out(path);
    out << "n,n_at_58,share_exact,share_within1,share_exact_at_58,share_within1_at_58\n";
    out << st.n << ',' << st.nAt58 << ',' << format_double(st.shareExact) << ','
        << format_double(st.shareWithin1) << ',' << format_double(st.shareExactAt58)
        << ',' << format_double(st.shareWithin1At58) << "\n";
    close_out(out, path);
}

void write_belief_histogram_csv(const std::string& path, const BeliefErrorStats& st) {
    std::ofstream out = open_out(path);
    out << "error_years,count\n";
    for (const auto& [err, count] : st.histogram) out << err << ',' << count << "\n";
    close_out(out, path);
}

void write_choice_diff_csv(const std::string& path,
                           const std::vector<ChoiceProbDiffRow>& rows) {
    std::ofstream out = open_out(path);
    out << "slot,spa,w,p_work_ri,work_re,diff\n";
    for (const ChoiceProbDiffRow& r : rows)
        out << r.slot << ',' << r.spa << ',' << r.w << ','
            << format_double(r.pWorkRi) << ',' << format_double(r.workRe) << ','
            << format_double(r.diff) << "\n";
    close_out(out, path);
}

namespace {

// shared row prefix for the per-state solution exports
void state_cols(std::ostream& out, const StateSpace& ss, int age, int slot, int w) {
    StateSpace::WState st = ss.unpack(w);
    int spa = slot == StateSpace::kReceiving ? -1 : ss.spa_of_slot(slot);
    out << age << ',' << slot << ',' << spa << ',' << w << ',' << st.type << ','
        << st.a << ',' << st.y << ',' << st.m << ',' << st.u;
}

} // namespace

void write_value_csv(const std::string& path, const Solution& sol) {
    std::ofstream out = open_out(path);
    out << "age,slot,spa,w,type,a_idx,y_idx,m_idx,u,value\n";
    const StateSpace& ss = sol.ss;
    for (int age = ss.params.ageStart; age <= ss.params.ageDeath; ++age)
        for (int slot = 0; slot < ss.nSlots(); ++slot) {
            if (!ss.slot_valid(age, slot)) continue;
            for (int w = 0; w < ss.nW(); ++w) {
                state_cols(out, ss, age, slot, w);
                out << ',' << format_double(sol.value(age, slot, w)) << "\n";
            }
        }
    close_out(out, path);
}

void write_policy_csv(const std::string& path, const Solution& sol) {
    std::ofstream out = open_out(path);
    out << "age,slot,spa,w,type,a_idx,y_idx,m_idx,u,a_next,work\n";
    const StateSpace& ss = sol.ss;
    for (int age = ss.params.ageStart; age <= ss.params.ageDeath; ++age)
        for (int slot = 0; slot < ss.nSlots(); ++slot) {
            if (!ss.slot_valid(age, slot)) continue;
            for (int w = 0; w < ss.nW(); ++w) {
                Decision d = sol.policy(age, slot, w);
                state_cols(out, ss, age, slot, w);
                out << ',' << d.aNext << ',' << int(d.work) << "\n";
            }
        }
    close_out(out, path);
}

void write_info_flow_csv(const std::string& path, const Solution& sol) {
    std::ofstream out = open_out(path);
    out << "age,w,type,a_idx,y_idx,m_idx,u,info_flow_nats,residual,iters\n";
    const StateSpace& ss = sol.ss;
    for (int age = ss.params.ageStart; age <= ss.params.ageDeath; ++age) {
        const Solution::AgeSlab& slab = sol.slab(age);
        if (!slab.hasBA) continue;
        for (int w = 0; w < ss.nW(); ++w) {
            StateSpace::WState st = ss.unpack(w);
            out << age << ',' << w << ',' << st.type << ',' << st.a << ',' << st.y
                << ',' << st.m << ',' << st.u << ','
                << format_double(slab.infoFlow[w]) << ','
                << format_double(slab.baResidual[w]) << ',' << slab.baIters[w]
                << "\n";
        }
    }
    close_out(out, path);
}

} // namespace spalab
