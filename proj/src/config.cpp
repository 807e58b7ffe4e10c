#include "spalab/config.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spalab/csv.hpp"
#include "spalab/errors.hpp"

namespace spalab {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    const char* b = v.data();
    const char* e = v.data() + v.size();
    auto [p, ec] = std::from_chars(b, e, x);
    if (ec != std::errc() || p != e)
        throw ConfigError(key, "expected a number, got '" + v + "'");
    return x;
}

long parse_long(const std::string& key, const std::string& v) {
    long x = 0;
    const char* b = v.data();
    const char* e = v.data() + v.size();
    auto [p, ec] = std::from_chars(b, e, x);
    if (ec != std::errc() || p != e)
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    return x;
}

int parse_int(const std::string& key, const std::string& v) {
    long x = parse_long(key, v);
    if (x < -1000000000L || x > 1000000000L)
        throw ConfigError(key, "integer out of range: '" + v + "'");
    return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const char* b = v.data();
    const char* e = v.data() + v.size();
    auto [p, ec] = std::from_chars(b, e, x);
    if (ec != std::errc() || p != e)
        throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<double> parse_dlist(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const std::string& tok : split_ws(v)) out.push_back(parse_double(key, tok));
    return out;
}

std::vector<int> parse_ilist(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (const std::string& tok : split_ws(v)) out.push_back(parse_int(key, tok));
    return out;
}

// the per-type fields every added type must spell out
const std::vector<std::string> kTypeFields = {
    "label",     "has_db",     "delta0",     "delta1", "delta2",
    "rho",       "sigma_eps",  "sigma_init", "unemp_prob", "share"};

struct Parser {
    RunConfig cfg = default_config();
    std::map<std::string, std::string> raw;
    std::set<std::string> providedTypeFields; // "i.field" for added types

    void assign(const std::string& key, const std::string& val);
    void assign_type(const std::string& key, int idx, const std::string& field,
                     const std::string& val);
    void finish();
};

void Parser::assign_type(const std::string& key, int idx, const std::string& field,
                         const std::string& val) {
    TypeProfile& t = cfg.params.types[static_cast<size_t>(idx)];
    if (field == "label") {
        if (val.empty()) throw ConfigError(key, "label must not be empty");
        t.label = val;
    } else if (field == "has_db") {
        t.hasDB = parse_bool(key, val);
    } else if (field == "delta0") {
        t.delta0 = parse_double(key, val);
    } else if (field == "delta1") {
        t.delta1 = parse_double(key, val);
    } else if (field == "delta2") {
        t.delta2 = parse_double(key, val);
    } else if (field == "rho") {
        t.rho = parse_double(key, val);
    } else if (field == "sigma_eps") {
        t.sigmaEps = parse_double(key, val);
    } else if (field == "sigma_init") {
        t.sigmaInit = parse_double(key, val);
    } else if (field == "unemp_prob") {
        t.unempProb = parse_dlist(key, val);
    } else if (field == "share") {
        t.share = parse_double(key, val);
    } else {
        throw ConfigError(key, "unknown key");
    }
    providedTypeFields.insert(std::to_string(idx) + "." + field);
}

void Parser::assign(const std::string& key, const std::string& val) {
    ModelParams& p = cfg.params;
    GridSpec& g = cfg.grids;
    ScenarioSpec& sc = cfg.scenario;
    RegressionSpec& rg = cfg.regression;

    if (key == "seed") { cfg.seed = parse_u64(key, val); return; }
    if (key == "output.dir") {
        if (val.empty()) throw ConfigError(key, "must not be empty");
        cfg.outDir = val;
        return;
    }

    if (key == "model.gamma") { p.gamma = parse_double(key, val); return; }
    if (key == "model.nu") { p.nu = parse_double(key, val); return; }
    if (key == "model.beta") { p.beta = parse_double(key, val); return; }
    if (key == "model.theta") { p.theta = parse_double(key, val); return; }
    if (key == "model.bequest_shift") { p.bequestShift = parse_double(key, val); return; }
    if (key == "model.lambda") { p.lambda = parse_double(key, val); return; }
    if (key == "model.r") { p.r = parse_double(key, val); return; }
    if (key == "model.work_hours") { p.workHours = parse_double(key, val); return; }
    if (key == "model.benefit") { p.benefit = parse_double(key, val); return; }
    if (key == "model.state_pension") { p.statePension = parse_double(key, val); return; }
    if (key == "model.spouse_income") { p.spouseIncome = parse_double(key, val); return; }
    if (key == "model.age_start") { p.ageStart = parse_int(key, val); return; }
    if (key == "model.age_work_end") { p.ageWorkEnd = parse_int(key, val); return; }
    if (key == "model.age_death") { p.ageDeath = parse_int(key, val); return; }
    if (key == "model.age_spouse_retire") { p.ageSpouseRetire = parse_int(key, val); return; }
    if (key == "model.age_entry") { p.ageEntry = parse_int(key, val); return; }
    if (key == "model.spouse_age_offset") { p.spouseAgeOffset = parse_int(key, val); return; }
    if (key == "model.aime_freeze_age") { p.aimeFreezeAge = parse_int(key, val); return; }
    if (key == "model.db1") { p.db.db1 = parse_double(key, val); return; }
    if (key == "model.db2") { p.db.db2 = parse_double(key, val); return; }

    if (key == "spa.init") { p.spaInit = parse_int(key, val); return; }
    if (key == "spa.cap") { p.spaCap = parse_int(key, val); return; }
    if (key == "spa.p_step") { p.pSpaStep = parse_double(key, val); return; }

    if (key == "grid.n_assets") { g.nAssets = parse_int(key, val); return; }
    if (key == "grid.asset_min") { g.assetMin = parse_double(key, val); return; }
    if (key == "grid.asset_max") { g.assetMax = parse_double(key, val); return; }
    if (key == "grid.asset_curv") { g.assetCurv = parse_double(key, val); return; }
    if (key == "grid.n_aime") { g.nAime = parse_int(key, val); return; }
    if (key == "grid.aime_min") { g.aimeMin = parse_double(key, val); return; }
    if (key == "grid.aime_max") { g.aimeMax = parse_double(key, val); return; }
    if (key == "grid.aime_curv") { g.aimeCurv = parse_double(key, val); return; }
    if (key == "grid.n_income") { g.nIncome = parse_int(key, val); return; }

    if (key == "scenario.spa_mode") {
        if (val == "paths") sc.spaMode = ScenarioSpec::SpaMode::Paths;
        else if (val == "process") sc.spaMode = ScenarioSpec::SpaMode::Process;
        else throw ConfigError(key, "expected paths or process, got '" + val + "'");
        return;
    }
    if (key == "scenario.cohort_spas") {
        std::vector<int> spas = parse_ilist(key, val);
        if (spas.empty()) throw ConfigError(key, "needs at least one cohort");
        sc.cohorts = constant_cohorts(spas);
        return;
    }
    if (key == "scenario.households_per_cohort") {
        sc.householdsPerCohort = parse_int(key, val);
        return;
    }
    if (key == "scenario.age_end") { sc.ageEnd = parse_int(key, val); return; }
    if (key == "scenario.mortality") { sc.mortality = parse_bool(key, val); return; }
    if (key == "scenario.init_assets_log_mean") {
        sc.initAssetsLogMean = parse_double(key, val);
        return;
    }
    if (key == "scenario.init_assets_log_sd") {
        sc.initAssetsLogSd = parse_double(key, val);
        return;
    }
    if (key == "scenario.init_aime_factor") {
        sc.initAimeFactor = parse_double(key, val);
        return;
    }

    if (key == "regression.treatment") {
        if (val == "below") rg.treatment = TreatmentForm::Below;
        else if (val == "at_or_below") rg.treatment = TreatmentForm::AtOrBelow;
        else throw ConfigError(key, "expected below or at_or_below, got '" + val + "'");
        return;
    }
    if (key == "regression.age_dummies") { rg.ageDummies = parse_bool(key, val); return; }
    if (key == "regression.cohort_dummies") {
        rg.cohortDummies = parse_bool(key, val);
        return;
    }
    if (key == "regression.extra_controls") {
        rg.extraControls = split_ws(val);
        for (const std::string& c : rg.extraControls)
            if (c != "type" && c != "unemployed")
                throw ConfigError(key, "unknown control '" + c + "'");
        return;
    }

    if (key.rfind("type.", 0) == 0) {
        std::string rest = key.substr(5);
        size_t dot = rest.find('.');
        if (dot != std::string::npos) {
            int idx = parse_int(key, rest.substr(0, dot));
            if (idx < 0 || idx >= static_cast<int>(cfg.params.types.size()))
                throw ConfigError(key, "type index out of range (type.count = " +
                                           std::to_string(cfg.params.types.size()) +
                                           ")");
            assign_type(key, idx, rest.substr(dot + 1), val);
            return;
        }
    }
    throw ConfigError(key, "unknown key");
}

void Parser::finish() {
    const size_t shipped = default_config().params.types.size();
    for (size_t i = shipped; i < cfg.params.types.size(); ++i)
        for (const std::string& f : kTypeFields)
            if (!providedTypeFields.count(std::to_string(i) + "." + f))
                throw ConfigError("type." + std::to_string(i) + "." + f,
                                  "missing required key");

    ModelParams& p = cfg.params;
    // the shipped survival table ends at the default terminal age
    if (p.ageDeath > p.mortality.ageDeath)
        throw ConfigError("model.age_death",
                          "the shipped survival table ends at " +
                              std::to_string(p.mortality.ageDeath));
    p.mortality.ageDeath = p.ageDeath;

    try {
        p.validate(cfg.grids.nIncome);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("", e.what());
    }

    const GridSpec& g = cfg.grids;
    if (g.nAssets < 2) throw ConfigError("grid.n_assets", "must be >= 2");
    if (g.nAime < 1) throw ConfigError("grid.n_aime", "must be >= 1");
    if (g.nIncome < 1) throw ConfigError("grid.n_income", "must be >= 1");
    if (!(g.assetMax > g.assetMin)) throw ConfigError("grid.asset_max", "must exceed grid.asset_min");
    if (!(g.assetMin >= 0.0)) throw ConfigError("grid.asset_min", "must be >= 0");
    if (!(g.aimeMax > g.aimeMin)) throw ConfigError("grid.aime_max", "must exceed grid.aime_min");
    if (!(g.aimeMin >= 0.0)) throw ConfigError("grid.aime_min", "must be >= 0");
    if (!(g.assetCurv > 0.0)) throw ConfigError("grid.asset_curv", "must be > 0");
    if (!(g.aimeCurv > 0.0)) throw ConfigError("grid.aime_curv", "must be > 0");

    const ScenarioSpec& sc = cfg.scenario;
    if (sc.householdsPerCohort < 1)
        throw ConfigError("scenario.households_per_cohort", "must be >= 1");
    if (sc.ageEnd < p.ageStart || sc.ageEnd >= p.ageDeath)
        throw ConfigError("scenario.age_end",
                          "must lie in [" + std::to_string(p.ageStart) + ", " +
                              std::to_string(p.ageDeath - 1) + "]");
    for (const CohortPath& c : sc.cohorts)
        for (int s : c.spaByAge)
            if (s < p.spaInit || s > p.spaCap)
                throw ConfigError("scenario.cohort_spas",
                                  "cohort SPA " + std::to_string(s) + " outside [" +
                                      std::to_string(p.spaInit) + ", " +
                                      std::to_string(p.spaCap) + "]");
}

} // namespace

RunConfig default_config() {
    RunConfig c;
    c.params = default_params();
    return c;
}

RunConfig parse_config(const std::string& text) {
    Parser ps;

    // override the type count first so indexed keys can be range-checked
    std::map<std::string, std::string> entries;
    std::istringstream in(text);
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(lineNo) +
                                      ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("", "line " + std::to_string(lineNo) + ": empty key");
        if (!entries.emplace(key, val).second)
            throw ConfigError(key, "duplicate key");
    }

    auto countIt = entries.find("type.count");
    if (countIt != entries.end()) {
        int n = parse_int("type.count", countIt->second);
        if (n < 1 || n > 64)
            throw ConfigError("type.count", "must lie in [1, 64]");
        ps.cfg.params.types.resize(static_cast<size_t>(n));
        entries.erase(countIt);
    }
    for (const auto& [key, val] : entries) ps.assign(key, val);
    ps.finish();
    return ps.cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string dump_config(const RunConfig& c) {
    std::ostringstream out;
    auto put = [&](const std::string& key, const std::string& val) {
        out << key << " = " << val << "\n";
    };
    auto putd = [&](const std::string& key, double v) { put(key, format_double(v)); };
    auto puti = [&](const std::string& key, long v) { put(key, std::to_string(v)); };
    auto putb = [&](const std::string& key, bool v) { put(key, v ? "true" : "false"); };

    const ModelParams& p = c.params;
    put("seed", std::to_string(c.seed));
    put("output.dir", c.outDir);

    putd("model.gamma", p.gamma);
    putd("model.nu", p.nu);
    putd("model.beta", p.beta);
    putd("model.theta", p.theta);
    putd("model.bequest_shift", p.bequestShift);
    putd("model.lambda", p.lambda);
    putd("model.r", p.r);
    putd("model.work_hours", p.workHours);
    putd("model.benefit", p.benefit);
    putd("model.state_pension", p.statePension);
    putd("model.spouse_income", p.spouseIncome);
    puti("model.age_start", p.ageStart);
    puti("model.age_work_end", p.ageWorkEnd);
    puti("model.age_death", p.ageDeath);
    puti("model.age_spouse_retire", p.ageSpouseRetire);
    puti("model.age_entry", p.ageEntry);
    puti("model.spouse_age_offset", p.spouseAgeOffset);
    puti("model.aime_freeze_age", p.aimeFreezeAge);
    putd("model.db1", p.db.db1);
    putd("model.db2", p.db.db2);

    puti("spa.init", p.spaInit);
    puti("spa.cap", p.spaCap);
    putd("spa.p_step", p.pSpaStep);

    const GridSpec& g = c.grids;
    puti("grid.n_assets", g.nAssets);
    putd("grid.asset_min", g.assetMin);
    putd("grid.asset_max", g.assetMax);
    putd("grid.asset_curv", g.assetCurv);
    puti("grid.n_aime", g.nAime);
    putd("grid.aime_min", g.aimeMin);
    putd("grid.aime_max", g.aimeMax);
    putd("grid.aime_curv", g.aimeCurv);
    puti("grid.n_income", g.nIncome);

    puti("type.count", static_cast<long>(p.types.size()));
    for (size_t i = 0; i < p.types.size(); ++i) {
        const TypeProfile& t = p.types[i];
        std::string pre = "type." + std::to_string(i) + ".";
        put(pre + "label", t.label);
        putb(pre + "has_db", t.hasDB);
        putd(pre + "delta0", t.delta0);
        putd(pre + "delta1", t.delta1);
        putd(pre + "delta2", t.delta2);
        putd(pre + "rho", t.rho);
        putd(pre + "sigma_eps", t.sigmaEps);
        putd(pre + "sigma_init", t.sigmaInit);
        std::string probs;
        for (size_t k = 0; k < t.unempProb.size(); ++k) {
            if (k) probs += " ";
            probs += format_double(t.unempProb[k]);
        }
        put(pre + "unemp_prob", probs);
        putd(pre + "share", t.share);
    }

    const ScenarioSpec& sc = c.scenario;
    put("scenario.spa_mode",
        sc.spaMode == ScenarioSpec::SpaMode::Paths ? "paths" : "process");
    std::string spas;
    for (size_t k = 0; k < sc.cohorts.size(); ++k) {
        if (k) spas += " ";
        spas += std::to_string(sc.cohorts[k].spaByAge.front());
    }
    put("scenario.cohort_spas", spas);
    puti("scenario.households_per_cohort", sc.householdsPerCohort);
    puti("scenario.age_end", sc.ageEnd);
    putb("scenario.mortality", sc.mortality);
    putd("scenario.init_assets_log_mean", sc.initAssetsLogMean);
    putd("scenario.init_assets_log_sd", sc.initAssetsLogSd);
    putd("scenario.init_aime_factor", sc.initAimeFactor);

    const RegressionSpec& rg = c.regression;
    put("regression.treatment",
        rg.treatment == TreatmentForm::Below ? "below" : "at_or_below");
    putb("regression.age_dummies", rg.ageDummies);
    putb("regression.cohort_dummies", rg.cohortDummies);
    std::string ctl;
    for (size_t k = 0; k < rg.extraControls.size(); ++k) {
        if (k) ctl += " ";
        ctl += rg.extraControls[k];
    }
    put("regression.extra_controls", ctl);
    return out.str();
}

std::uint64_t config_hash(const RunConfig& c) {
    // seed and output location never change what a solve produces, so runs
    // that only move them keep their artifacts fresh
    std::istringstream in(dump_config(c));
    std::uint64_t h = 0xcbf29ce484222325ull;
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("seed = ", 0) == 0 || line.rfind("output.dir = ", 0) == 0)
            continue;
        for (unsigned char ch : line) {
            h ^= ch;
            h *= 0x100000001b3ull;
        }
        h ^= static_cast<unsigned char>('\n');
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return s;
}

} // namespace spalab
