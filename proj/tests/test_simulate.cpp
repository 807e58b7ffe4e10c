#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "spalab/errors.hpp"
#include "spalab/model.hpp"
#include "spalab/re_solver.hpp"
#include "spalab/ri_solver.hpp"
#include "spalab/simulate.hpp"

using namespace spalab;

namespace {

ModelParams toy_base() {
    ModelParams p;
    p.gamma = 1.5;
    p.nu = 0.4;
    p.beta = 0.96;
    p.theta = 0.05;
    p.bequestShift = 2000.0;
    p.lambda = 0.02;
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
    p.aimeFreezeAge = 52;
    p.db = {0.10, 0.0};

    TypeProfile t;
    t.label = "toy";
    t.hasDB = false;
    t.delta0 = 7.3;
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

GridSpec toy_grids() {
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

GridSpec small_grids() {
    GridSpec gs;
    gs.nAssets = 6;
    gs.assetMax = 6.0e5;
    gs.nAime = 2;
    return gs;
}

const StateSpace& toy_space() {
    static StateSpace ss = make_state_space(toy_base(), toy_grids());
    return ss;
}
const Solution& toy_re() {
    static Solution s = solve_re(toy_space());
    return s;
}
const Solution& toy_ri() {
    static Solution s = solve_ri(toy_space());
    return s;
}

const StateSpace& small_space() {
    static StateSpace ss = make_state_space(default_params(), small_grids());
    return ss;
}
const Solution& small_re() {
    static Solution s = solve_re(small_space());
    return s;
}
const Solution& small_ri() {
    static Solution s = solve_ri(small_space());
    return s;
}

ScenarioSpec toy_scenario(SolveKind kind, int perCohort) {
    ScenarioSpec sc;
    sc.kind = kind;
    sc.householdsPerCohort = perCohort;
    sc.ageEnd = 62;
    return sc;
}

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace

TEST_CASE("default scenario produces a balanced panel of the documented shape") {
    ScenarioSpec sc;
    Panel panel = simulate_panel(small_re(), sc);
    const ModelParams& p = small_space().params;

    REQUIRE(panel.rows.size() == 36000);
    CHECK(panel.kind == SolveKind::RE);
    CHECK(panel.seed == 1);
    CHECK(panel.householdsPerCohort == 500);
    REQUIRE(panel.cohortLabels.size() == 3);
    CHECK(panel.cohortLabels[0] == "spa60");
    CHECK(panel.cohortLabels[1] == "spa61");
    CHECK(panel.cohortLabels[2] == "spa62");

    // balanced: 1500 households, each contributing ages 52..75 in order
    const int nAges = sc.ageEnd - p.ageStart + 1;
    std::map<int, int> perAge;
    for (int h = 0; h < 1500; ++h) {
        for (int k = 0; k < nAges; ++k) {
            const PanelRecord& r = panel.rows[static_cast<size_t>(h * nAges + k)];
            REQUIRE(r.householdId == h);
            REQUIRE(r.age == p.ageStart + k);
            REQUIRE(r.cohort == h / 500);
            ++perAge[r.age];
        }
    }
    for (const auto& [age, n] : perAge) CHECK(n == 1500);

    // rational-expectations rows carry the belief sentinels
    for (const PanelRecord& r : panel.rows) {
        REQUIRE(r.beliefMode == -1);
        REQUIRE(r.beliefModeProb == 0.0);
    }
}

TEST_CASE("panel rows satisfy the budget identity and the transition laws") {
    ScenarioSpec sc;
    sc.kind = SolveKind::RI;
    sc.householdsPerCohort = 100;
    sc.seed = 7;
    Panel panel = simulate_panel(small_ri(), sc);
    const ModelParams& p = small_space().params;
    const int nAges = sc.ageEnd - p.ageStart + 1;
    REQUIRE(panel.rows.size() == static_cast<size_t>(300 * nAges));

    for (const PanelRecord& r : panel.rows) {
        REQUIRE(r.consumption > 0.0);
        double cash = cash_on_hand(r.assets, r.worked, r.unemployed, r.receiving,
                                   r.age, r.incomeOffer, r.aime,
                                   p.types[static_cast<size_t>(r.typeId)], p);
        REQUIRE(close_rel(cash, r.consumption + r.nextAssets, 1e-9));
        if (r.unemployed) REQUIRE_FALSE(r.worked);
        if (r.age >= p.ageWorkEnd) REQUIRE_FALSE(r.worked);
        REQUIRE(r.receiving == (r.age >= r.trueSpa));
        REQUIRE(r.trueSpa >= p.spaInit);
        REQUIRE(r.trueSpa <= p.spaCap);
        REQUIRE(r.beliefMode >= p.spaInit);
        REQUIRE(r.beliefMode <= p.spaCap);
        REQUIRE(r.beliefModeProb > 0.0);
        REQUIRE(r.beliefModeProb <= 1.0);
        if (r.receiving) {
            REQUIRE(r.beliefMode == r.trueSpa);
            REQUIRE(r.beliefModeProb == 1.0);
        }
    }

    for (int h = 0; h < 300; ++h)
        for (int k = 0; k + 1 < nAges; ++k) {
            const PanelRecord& a = panel.rows[static_cast<size_t>(h * nAges + k)];
            const PanelRecord& b = panel.rows[static_cast<size_t>(h * nAges + k + 1)];
            REQUIRE(a.householdId == b.householdId);
            REQUIRE(a.typeId == b.typeId);
            REQUIRE(b.assets == a.nextAssets);
            REQUIRE(b.aime == aime_update(a.aime, p.work_year_index(a.age), a.worked,
                                          a.incomeOffer, p));
            REQUIRE(b.trueSpa >= a.trueSpa);
            REQUIRE(b.trueSpa <= a.trueSpa + 1);
            if (a.receiving) {
                REQUIRE(b.receiving);
                REQUIRE(b.trueSpa == a.trueSpa);
            }
        }
}

TEST_CASE("a seed pins the panel bit for bit and worker count is irrelevant") {
    ScenarioSpec sc = toy_scenario(SolveKind::RI, 40);
    sc.seed = 11;

    Panel a = simulate_panel(toy_ri(), sc);
    Panel b = simulate_panel(toy_ri(), sc);
    CHECK(a.rows == b.rows);

    SolveOptions serial;
    serial.parallel = false;
    SolveOptions threaded;
    threaded.workers = 3;
    Panel c = simulate_panel(toy_ri(), sc, serial);
    Panel d = simulate_panel(toy_ri(), sc, threaded);
    CHECK(a.rows == c.rows);
    CHECK(a.rows == d.rows);

    sc.seed = 12;
    Panel e = simulate_panel(toy_ri(), sc);
    CHECK(a.rows != e.rows);
}

TEST_CASE("pension-start ages follow the cohort paths exactly") {
    ScenarioSpec sc = toy_scenario(SolveKind::RE, 25);
    sc.cohorts = constant_cohorts({60, 61, 62});
    sc.cohorts.push_back({"reform", {61, 62}}); // SPA moves 61 -> 62 at age 61
    Panel panel = simulate_panel(toy_re(), sc);

    auto expected_spa = [&](int cohort, int age) {
        if (cohort < 3) return 60 + cohort;
        return age == 60 ? 61 : 62;
    };
    for (const PanelRecord& r : panel.rows) {
        if (!r.receiving) CHECK(r.trueSpa == expected_spa(r.cohort, r.age));
        CHECK(r.receiving == (r.age >= r.trueSpa));
    }
    // the reform cohort is never caught at 61: the goalpost moves first
    for (const PanelRecord& r : panel.rows)
        if (r.cohort == 3 && r.receiving) CHECK(r.trueSpa == 62);
    // constant cohorts start receipt at their own SPA
    std::set<std::pair<int, int>> startAges;
    for (const PanelRecord& r : panel.rows)
        if (r.receiving) startAges.insert({r.cohort, r.trueSpa});
    CHECK(startAges.count({0, 60}) == 1);
    CHECK(startAges.count({1, 61}) == 1);
    CHECK(startAges.count({2, 62}) == 1);
}

TEST_CASE("attention and costless panels share exogenous histories under one seed") {
    ScenarioSpec re;
    re.kind = SolveKind::RE;
    re.spaMode = ScenarioSpec::SpaMode::Process;
    re.householdsPerCohort = 60;
    re.seed = 99;
    ScenarioSpec ri = re;
    ri.kind = SolveKind::RI;

    Panel a = simulate_panel(small_re(), re);
    Panel b = simulate_panel(small_ri(), ri);
    REQUIRE(a.rows.size() == b.rows.size());

    int decisionDiffs = 0;
    for (size_t i = 0; i < a.rows.size(); ++i) {
        const PanelRecord& x = a.rows[i];
        const PanelRecord& y = b.rows[i];
        REQUIRE(x.householdId == y.householdId);
        REQUIRE(x.age == y.age);
        REQUIRE(x.typeId == y.typeId);
        REQUIRE(x.incomeOffer == y.incomeOffer);
        REQUIRE(x.unemployed == y.unemployed);
        REQUIRE(x.trueSpa == y.trueSpa);
        REQUIRE(x.receiving == y.receiving);
        if (x.worked != y.worked || x.nextAssets != y.nextAssets) ++decisionDiffs;
    }
    CHECK(decisionDiffs > 0);
}

TEST_CASE("a frozen pension process keeps every household at the initial age") {
    ModelParams p = default_params();
    p.pSpaStep = 0.0;
    StateSpace ss = make_state_space(p, small_grids());
    Solution sol = solve_re(ss);

    ScenarioSpec sc;
    sc.spaMode = ScenarioSpec::SpaMode::Process;
    sc.cohorts = {{"frozen", {60}}}; // label only; process mode ignores the path
    sc.householdsPerCohort = 50;
    sc.ageEnd = 65;
    Panel panel = simulate_panel(sol, sc);
    for (const PanelRecord& r : panel.rows) {
        CHECK(r.trueSpa == p.spaInit);
        CHECK(r.receiving == (r.age >= p.spaInit));
    }
}

TEST_CASE("mortality truncates histories and work ends at the statutory age") {
    ScenarioSpec sc;
    sc.spaMode = ScenarioSpec::SpaMode::Process;
    sc.householdsPerCohort = 200;
    sc.ageEnd = 104;
    sc.mortality = true;
    sc.seed = 3;
    Panel panel = simulate_panel(small_re(), sc);
    const ModelParams& p = small_space().params;

    const size_t full = 600u * static_cast<size_t>(104 - p.ageStart + 1);
    CHECK(panel.rows.size() < full); // someone dies

    long late = 0;
    for (const PanelRecord& r : panel.rows)
        if (r.age >= p.ageWorkEnd) {
            ++late;
            REQUIRE_FALSE(r.worked);
        }
    CHECK(late > 0); // someone survives past the statutory end of work

    // histories are contiguous from the first age
    std::map<int, int> lastAge;
    for (const PanelRecord& r : panel.rows) {
        auto it = lastAge.find(r.householdId);
        if (it == lastAge.end()) {
            REQUIRE(r.age == p.ageStart);
            lastAge[r.householdId] = r.age;
        } else {
            REQUIRE(r.age == it->second + 1);
            it->second = r.age;
        }
    }
    CHECK(lastAge.size() == 600);
}

TEST_CASE("summary statistics follow the survey-table conventions") {
    SummaryStats st = summarize({100.0, 1.0, 2.0, 3.0, 4.0});
    CHECK(st.n == 5);
    CHECK(st.mean == doctest::Approx(22.0).epsilon(1e-14));
    // percentile points 1,5,10,25,50,75,90,95,99
    CHECK(st.percentiles[0] == 1.0);
    CHECK(st.percentiles[1] == 1.0);
    CHECK(st.percentiles[2] == 1.0);
    CHECK(st.percentiles[3] == 2.0);
    CHECK(st.percentiles[4] == 3.0);
    CHECK(st.percentiles[5] == 4.0);
    CHECK(st.percentiles[6] == 100.0);
    CHECK(st.percentiles[7] == 100.0);
    CHECK(st.percentiles[8] == 100.0);
    CHECK(st.sd == doctest::Approx(std::sqrt(7610.0 / 4.0)).epsilon(1e-13));
    CHECK(st.skewness == doctest::Approx(88920.0 / std::pow(1522.0, 1.5)).epsilon(1e-13));
    CHECK(st.kurtosis ==
          doctest::Approx((37604834.0 / 5.0) / (1522.0 * 1522.0)).epsilon(1e-13));

    // integer rank: midpoint of the two adjacent order statistics
    SummaryStats even = summarize({4.0, 1.0, 3.0, 2.0});
    CHECK(even.percentiles[4] == 2.5);
    CHECK(even.percentiles[3] == 1.5);
    CHECK(even.percentiles[5] == 3.5);

    SummaryStats flat = summarize({5.0, 5.0, 5.0});
    CHECK(flat.sd == 0.0);
    CHECK(std::isnan(flat.skewness));
    CHECK(std::isnan(flat.kurtosis));
    CHECK(flat.percentiles[4] == 5.0);

    SummaryStats one = summarize({2.5});
    CHECK(one.n == 1);
    CHECK(std::isnan(one.sd));

    CHECK_THROWS_AS(summarize({}), std::invalid_argument);

    ScenarioSpec sc = toy_scenario(SolveKind::RE, 10);
    Panel panel = simulate_panel(toy_re(), sc);
    std::vector<double> assets;
    for (const PanelRecord& r : panel.rows) assets.push_back(r.assets);
    SummaryStats viaPanel = summary_stats(panel, "assets");
    SummaryStats direct = summarize(assets);
    CHECK(viaPanel.n == direct.n);
    CHECK(viaPanel.mean == direct.mean);
    CHECK(viaPanel.percentiles == direct.percentiles);
    CHECK_THROWS_AS(summary_stats(panel, "hours"), std::invalid_argument);
}

TEST_CASE("age profiles aggregate participation and assets by age") {
    ScenarioSpec sc = toy_scenario(SolveKind::RE, 30);
    Panel panel = simulate_panel(toy_re(), sc);
    std::vector<AgeProfileRow> prof = age_profiles(panel);

    REQUIRE(prof.size() == 3); // ages 60, 61, 62
    for (size_t k = 0; k < prof.size(); ++k) {
        CHECK(prof[k].age == 60 + static_cast<int>(k));
        CHECK(prof[k].n == 90);
        CHECK(prof[k].participationRate >= 0.0);
        CHECK(prof[k].participationRate <= 1.0);
        CHECK(prof[k].meanAssets >= 0.0);
    }
    CHECK(prof[2].participationRate == 0.0); // work ends at 62

    double sum = 0.0;
    long n = 0;
    for (const PanelRecord& r : panel.rows)
        if (r.age == 61) { sum += r.assets; ++n; }
    CHECK(prof[1].meanAssets == doctest::Approx(sum / static_cast<double>(n)).epsilon(1e-14));
}

TEST_CASE("work-probability maps are flat when a rule is compared with itself") {
    const StateSpace& ss = toy_space();
    std::vector<ChoiceProbDiffRow> rows = choice_prob_diff_map(toy_re(), toy_re(), 61);

    // valid slots at 61: receiving plus the SPA-62 pending slot
    REQUIRE(rows.size() == static_cast<size_t>(2 * ss.nW()));
    for (const ChoiceProbDiffRow& r : rows) {
        CHECK(r.diff == 0.0);
        CHECK(r.pWorkRi == r.workRe);
        CHECK((r.workRe == 0.0 || r.workRe == 1.0));
        if (r.slot == StateSpace::kReceiving) CHECK(r.spa == -1);
        else CHECK(r.spa == 62);
    }

    // on the shipped calibration the attention rule overturns the costless
    // work choice outright at some states once the SPA is close
    std::vector<ChoiceProbDiffRow> ri = choice_prob_diff_map(small_ri(), small_re(), 58);
    double maxAbs = 0.0;
    for (const ChoiceProbDiffRow& r : ri) {
        CHECK(r.pWorkRi >= 0.0);
        CHECK(r.pWorkRi <= 1.0);
        maxAbs = std::max(maxAbs, std::abs(r.diff));
    }
    CHECK(maxAbs > 0.5);

    GridSpec gs = toy_grids();
    gs.nAssets = 4;
    StateSpace other = make_state_space(toy_base(), gs);
    Solution otherRe = solve_re(other);
    CHECK_THROWS_AS(choice_prob_diff_map(toy_ri(), otherRe, 61), ConfigError);
    CHECK_THROWS_AS(choice_prob_diff_map(toy_ri(), toy_re(), 59), std::invalid_argument);
    CHECK_THROWS_AS(choice_prob_diff_map(toy_ri(), toy_re(), 63), std::invalid_argument);
}

TEST_CASE("scenario validation rejects inconsistent inputs") {
    auto key_of = [](auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            return std::string(e.keyPath);
        }
        return std::string("no throw");
    };

    ScenarioSpec sc = toy_scenario(SolveKind::RE, 10);
    ScenarioSpec bad = sc;
    bad.kind = SolveKind::RI;
    CHECK(key_of([&] { simulate_panel(toy_re(), bad); }) == "scenario.solution_kind");

    bad = sc;
    bad.cohorts.clear();
    CHECK(key_of([&] { simulate_panel(toy_re(), bad); }) == "scenario.cohort_spas");

    bad = sc;
    bad.householdsPerCohort = 0;
    CHECK(key_of([&] { simulate_panel(toy_re(), bad); }) ==
          "scenario.households_per_cohort");

    bad = sc;
    bad.ageEnd = 59;
    CHECK(key_of([&] { simulate_panel(toy_re(), bad); }) == "scenario.panel_age_end");
    bad.ageEnd = 63; // terminal age itself is not simulated
    CHECK(key_of([&] { simulate_panel(toy_re(), bad); }) == "scenario.panel_age_end");

    bad = sc;
    bad.cohorts[0].spaByAge.clear();
    CHECK(key_of([&] { simulate_panel(toy_re(), bad); }) == "scenario.cohort_spas");

    bad = sc;
    bad.cohorts[0].spaByAge = {59};
    CHECK(key_of([&] { simulate_panel(toy_re(), bad); }) == "scenario.cohort_spas");
    bad.cohorts[0].spaByAge = {63};
    CHECK(key_of([&] { simulate_panel(toy_re(), bad); }) == "scenario.cohort_spas");
    bad.cohorts[0].spaByAge = {61, 60};
    CHECK(key_of([&] { simulate_panel(toy_re(), bad); }) == "scenario.cohort_spas");
    bad.cohorts[0].spaByAge = {60, 62};
    CHECK(key_of([&] { simulate_panel(toy_re(), bad); }) == "scenario.cohort_spas");

    bad = sc;
    bad.initAssetsLogSd = -0.5;
    CHECK(key_of([&] { simulate_panel(toy_re(), bad); }) ==
          "scenario.init_assets_log_sd");

    bad = sc;
    bad.initAssetsLogMean = std::nan("");
    CHECK(key_of([&] { simulate_panel(toy_re(), bad); }) ==
          "scenario.init_assets_log_mean");

    bad = sc;
    bad.initAimeFactor = -1.0;
    CHECK(key_of([&] { simulate_panel(toy_re(), bad); }) == "scenario.init_aime_factor");
}

TEST_CASE("belief tracking is calibrated against realized pension starts") {
    ScenarioSpec sc;
    sc.kind = SolveKind::RI;
    sc.spaMode = ScenarioSpec::SpaMode::Process;
    sc.cohorts = {{"process", {60}}};
    sc.householdsPerCohort = 1200;
    sc.ageEnd = 70;
    sc.seed = 17;
    Panel panel = simulate_panel(small_ri(), sc);

    // Pending-age filter output is an exact posterior here, so the frequency of
    // a correct mode must match the reported mode probability on average.
    double freq = 0.0, prob = 0.0;
    long n = 0;
    std::map<int, std::array<double, 3>> bins; // decile -> [count, freq, prob]
    for (const PanelRecord& r : panel.rows) {
        if (r.receiving) continue;
        double correct = r.beliefMode == r.trueSpa ? 1.0 : 0.0;
        freq += correct;
        prob += r.beliefModeProb;
        ++n;
        auto& b = bins[static_cast<int>(r.beliefModeProb * 10.0)];
        b[0] += 1.0;
        b[1] += correct;
        b[2] += r.beliefModeProb;
    }
    REQUIRE(n > 5000);
    freq /= static_cast<double>(n);
    prob /= static_cast<double>(n);
    CHECK(std::abs(freq - prob) < 0.02);
    for (const auto& [decile, b] : bins)
        if (b[0] >= 1500.0) CHECK(std::abs(b[1] / b[0] - b[2] / b[0]) < 0.05);

    // mistakes really occur, and receipt resolves them
    CHECK(freq < 0.999);
    for (const PanelRecord& r : panel.rows)
        if (r.receiving) REQUIRE(r.beliefMode == r.trueSpa);
}

TEST_CASE("panel belief extraction mirrors the attention panel") {
    ScenarioSpec re = toy_scenario(SolveKind::RE, 15);
    CHECK(panel_belief_obs(simulate_panel(toy_re(), re)).empty());

    ScenarioSpec ri = toy_scenario(SolveKind::RI, 15);
    Panel panel = simulate_panel(toy_ri(), ri);
    std::vector<BeliefObs> obs = panel_belief_obs(panel);
    REQUIRE(obs.size() == panel.rows.size());
    for (size_t i = 0; i < obs.size(); ++i) {
        CHECK(obs[i].age == panel.rows[i].age);
        CHECK(obs[i].beliefMode == panel.rows[i].beliefMode);
        CHECK(obs[i].trueSpa == panel.rows[i].trueSpa);
    }
}
