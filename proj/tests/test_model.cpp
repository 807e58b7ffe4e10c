#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "spalab/model.hpp"

using namespace spalab;

namespace {

ModelParams base_params() {
    ModelParams p = default_params();
    return p;
}

// independent draw of the SPA walk conditioned on no receipt through `age`,
// used as a Monte Carlo oracle for the forward-recursion prior
int draw_conditioned_spa(int age, const ModelParams& p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    while (true) {
        int spa = p.spaInit;
        bool rejected = false;
        for (int a = p.ageEntry + 1; a <= age; ++a) {
            if (spa < p.spaCap && uni(rng) < p.pSpaStep) ++spa;
            if (spa <= a) { rejected = true; break; }
        }
        if (!rejected) return spa;
    }
}

} // namespace

TEST_CASE("flow utility closed forms") {
    ModelParams p = base_params();
    p.gamma = 2.0;
    p.nu = 0.5;
    // (2^.5 * .7^.5)^(-1) / (-1) = -1/sqrt(1.4)
    CHECK(flow_utility(2.0, 0.7, p) == doctest::Approx(-0.84515425472851658).epsilon(1e-14));
    p.gamma = 2.32;
    p.nu = 0.288;
    CHECK(flow_utility(1.0, 1.0, p) == doctest::Approx(-0.75757575757575758).epsilon(1e-14));
    p.gamma = 1.5;
    p.nu = 0.4;
    CHECK(flow_utility(3.0, 1.0, p) == doctest::Approx(-1.6054831235204614).epsilon(1e-14));
}

TEST_CASE("flow utility domain and monotonicity") {
    ModelParams p = base_params();
    CHECK_THROWS_AS(flow_utility(0.0, 1.0, p), std::domain_error);
    CHECK_THROWS_AS(flow_utility(-1.0, 1.0, p), std::domain_error);
    CHECK_THROWS_AS(flow_utility(1.0, 0.0, p), std::domain_error);
    CHECK_THROWS_AS(flow_utility(1.0, 1.5, p), std::domain_error);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uc(0.1, 1e5);
    for (int i = 0; i < 200; ++i) {
        double c1 = uc(rng), c2 = uc(rng);
        if (c1 > c2) std::swap(c1, c2);
        // strictly increasing in consumption, strictly higher at full leisure
        CHECK(flow_utility(c2 + 1.0, 0.7, p) > flow_utility(c1, 0.7, p));
        CHECK(flow_utility(c1, 1.0, p) > flow_utility(c1, 1.0 - p.workHours, p));
    }
}

TEST_CASE("bequest utility") {
    ModelParams p = base_params();
    p.gamma = 2.32;
    p.nu = 0.288;
    p.theta = 2.899e-2;
    p.bequestShift = 500.0;
    CHECK(bequest_utility(10000.0, p) == doctest::Approx(-0.00065009819499067753).epsilon(1e-13));
    p.bequestShift = 1.0;
    CHECK(bequest_utility(0.0, p) == doctest::Approx(-0.021962121212121212).epsilon(1e-14));
    p.theta = 0.0;
    CHECK(bequest_utility(12345.0, p) == 0.0);
    CHECK_THROWS_AS(bequest_utility(-1.0, p), std::domain_error);

    // monotone in wealth left behind
    p = base_params();
    double prev = bequest_utility(0.0, p);
    for (double a : {100.0, 1e4, 1e6}) {
        double v = bequest_utility(a, p);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("db pension") {
    DBPensionParams db{0.5914, -4.232e-6};
    CHECK(db_pension(0.0, db) == 0.0);
    CHECK(db_pension(10000.0, db) == doctest::Approx(6337.2).epsilon(1e-14));
    // concave case caps at the interior peak
    DBPensionParams cap{0.5, 0.25};
    CHECK(db_pension(2.0, cap) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(db_pension(1.0, cap) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(db_pension(0.5, cap) == doctest::Approx(0.1875).epsilon(1e-14));
    CHECK_THROWS_AS(db_pension(-1.0, db), std::domain_error);
    // weakly increasing below the cap for the negative-db2 branch
    double prev = -1.0;
    for (double a = 0.0; a <= 60000.0; a += 1500.0) {
        double v = db_pension(a, db);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("aime update") {
    ModelParams p = base_params();
    CHECK(aime_update(10.0, 2, true, 20.0, p) == doctest::Approx(15.0).epsilon(1e-15));
    CHECK(aime_update(10.0, 2, false, 0.0, p) == doctest::Approx(5.0).epsilon(1e-15));
    // frozen at and after the freeze age
    int freezeIdx = p.work_year_index(p.aimeFreezeAge);
    CHECK(aime_update(123.0, freezeIdx, true, 9e9, p) == 123.0);
    CHECK(aime_update(123.0, freezeIdx + 7, false, 0.0, p) == 123.0);
    // one year before the freeze still updates
    CHECK(aime_update(100.0, freezeIdx - 1, false, 0.0, p)
          == doctest::Approx(100.0 * (freezeIdx - 2) / (freezeIdx - 1)).epsilon(1e-15));
    CHECK_THROWS_AS(aime_update(1.0, 0, true, 1.0, p), std::invalid_argument);
    CHECK_THROWS_AS(aime_update(-1.0, 2, true, 1.0, p), std::domain_error);
}

TEST_CASE("cash on hand is the sum of its parts") {
    ModelParams p = base_params();
    const TypeProfile& tp = p.types[1]; // has DB
    REQUIRE(tp.hasDB);

    // not working, unemployed, below all pension ages
    double c = cash_on_hand(0.0, false, true, false, 55, 300.0, 1000.0, tp, p);
    CHECK(c == p.benefit + p.spouseIncome);

    // working while receiving, spouse retired
    double c2 = cash_on_hand(100.0, true, false, true, 67, 50.0, 1000.0, tp, p);
    CHECK(c2 == doctest::Approx((1.0 + p.r) * 100.0 + 50.0 + 2.0 * p.statePension).epsilon(1e-15));

    // employed but not working: no benefit
    double c3 = cash_on_hand(0.0, false, false, false, 55, 300.0, 1000.0, tp, p);
    CHECK(c3 == p.spouseIncome);

    // DB pension arrives only when not working from the freeze age, DB types
    // only (the spouse has retired onto the state pension by then)
    double aime = 20000.0;
    double withDb = cash_on_hand(0.0, false, false, false, p.aimeFreezeAge, 300.0, aime, tp, p);
    CHECK(withDb == doctest::Approx(p.statePension + db_pension(aime, p.db)).epsilon(1e-15));
    double working = cash_on_hand(0.0, true, false, false, p.aimeFreezeAge, 300.0, aime, tp, p);
    CHECK(working == doctest::Approx(300.0 + p.statePension).epsilon(1e-15));
    const TypeProfile& noDb = p.types[0];
    REQUIRE(!noDb.hasDB);
    double without = cash_on_hand(0.0, false, false, false, p.aimeFreezeAge, 300.0, aime, noDb, p);
    CHECK(without == p.statePension);

    CHECK_THROWS_AS(cash_on_hand(-1.0, false, false, false, 55, 0.0, 0.0, tp, p),
                    std::domain_error);
}

TEST_CASE("spa transition") {
    ModelParams p = base_params();
    SpaDist atCap = spa_transition(p.spaCap, false, p);
    CHECK(atCap.lo == p.spaCap);
    REQUIRE(atCap.probs.size() == 1);
    CHECK(atCap.probs[0] == 1.0);

    SpaDist step = spa_transition(60, false, p);
    CHECK(step.lo == 60);
    REQUIRE(step.probs.size() == 2);
    CHECK(step.probs[0] == doctest::Approx(0.94).epsilon(1e-15));
    CHECK(step.probs[1] == doctest::Approx(0.06).epsilon(1e-15));

    SpaDist frozen = spa_transition(63, true, p);
    REQUIRE(frozen.probs.size() == 1);
    CHECK(frozen.lo == 63);
    CHECK(frozen.probs[0] == 1.0);

    CHECK_THROWS_AS(spa_transition(59, false, p), std::domain_error);
    CHECK_THROWS_AS(spa_transition(71, false, p), std::domain_error);

    for (int spa = p.spaInit; spa <= p.spaCap; ++spa) {
        SpaDist d = spa_transition(spa, false, p);
        CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-15));
        for (size_t k = 0; k < d.probs.size(); ++k)
            CHECK(d.lo + static_cast<int>(k) >= spa); // never falls
    }
}

TEST_CASE("no-receipt prior endpoints") {
    ModelParams p = base_params();
    SpaDist entry = no_receipt_prior(p.ageEntry, p);
    CHECK(entry.at(p.spaInit) == 1.0);
    CHECK(entry.total() == doctest::Approx(1.0).epsilon(1e-15));

    SpaDist last = no_receipt_prior(p.spaCap - 1, p);
    REQUIRE(last.probs.size() == 1);
    CHECK(last.lo == p.spaCap);
    CHECK(last.probs[0] == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(no_receipt_prior(p.ageEntry - 1, p), std::invalid_argument);
    CHECK_THROWS_AS(no_receipt_prior(p.spaCap, p), std::invalid_argument);
}

TEST_CASE("no-receipt prior at 52 matches the binomial closed form") {
    // before the initial SPA the conditioning never binds, so the walk position
    // is capped-binomial in the number of elapsed years
    ModelParams p = base_params();
    SpaDist d = no_receipt_prior(52, p);
    CHECK(d.lo == 60);
    REQUIRE(d.probs.size() == 11);
    int n = 52 - p.ageEntry;
    double q = p.pSpaStep;
    double tail = 1.0;
    for (int k = 0; k < 10; ++k) {
        double binom = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0))
                       * std::pow(q, k) * std::pow(1.0 - q, n - k);
        CHECK(d.probs[k] == doctest::Approx(binom).epsilon(1e-10));
        tail -= binom;
    }
    CHECK(d.probs[10] == doctest::Approx(tail).epsilon(1e-8));
    CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
    // frozen spot checks (independent high-precision evaluation)
    CHECK(d.probs[0] == doctest::Approx(0.13806745360886501).epsilon(1e-12));
    CHECK(d.probs[1] == doctest::Approx(0.28201011800959662).epsilon(1e-12));
    CHECK(d.probs[10] == doctest::Approx(1.1433651813901299e-5).epsilon(1e-8));
}

TEST_CASE("no-receipt prior at conditioned ages matches Monte Carlo") {
    ModelParams p = base_params();
    std::mt19937_64 rng(20240817);
    const int nDraws = 200000;
    for (int age : {60, 64, 68}) {
        SpaDist d = no_receipt_prior(age, p);
        CHECK(d.lo == age + 1);
        CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
        std::vector<int> counts(p.spaCap - p.spaInit + 1, 0);
        for (int i = 0; i < nDraws; ++i) counts[draw_conditioned_spa(age, p, rng) - p.spaInit]++;
        for (int spa = d.lo; spa <= p.spaCap; ++spa) {
            double freq = static_cast<double>(counts[spa - p.spaInit]) / nDraws;
            double se = std::sqrt(std::max(d.at(spa) * (1.0 - d.at(spa)), 1e-9) / nDraws);
            CHECK(std::abs(freq - d.at(spa)) < 5.0 * se + 1e-4);
        }
        for (int spa = p.spaInit; spa <= age; ++spa) CHECK(d.at(spa) == 0.0);
    }
}

TEST_CASE("no-receipt prior rejects impossible conditioning") {
    ModelParams p = base_params();
    p.pSpaStep = 0.0;
    // below the initial SPA the event is still sure
    SpaDist d = no_receipt_prior(59, p);
    CHECK(d.at(60) == 1.0);
    // at and beyond it the agent would always be receiving
    CHECK_THROWS_AS(no_receipt_prior(60, p), std::logic_error);
}

TEST_CASE("spa dist mode ties to the lower value") {
    SpaDist d;
    d.lo = 61;
    d.probs = {0.2, 0.4, 0.4};
    CHECK(d.mode() == 62);
}

TEST_CASE("params validation names the offending field") {
    ModelParams p = base_params();
    p.gamma = 1.0;
    CHECK_THROWS_WITH_AS(p.validate(5), doctest::Contains("gamma"), std::invalid_argument);
    p = base_params();
    p.nu = 1.0;
    CHECK_THROWS_WITH_AS(p.validate(5), doctest::Contains("nu"), std::invalid_argument);
    p = base_params();
    p.types[2].share += 0.1;
    CHECK_THROWS_WITH_AS(p.validate(5), doctest::Contains("types"), std::invalid_argument);
    p = base_params();
    p.types[0].unempProb.pop_back();
    CHECK_THROWS_WITH_AS(p.validate(5), doctest::Contains("unempProb"), std::invalid_argument);
    p = base_params();
    CHECK_NOTHROW(p.validate(5));
}
