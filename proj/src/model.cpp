#include "spalab/model.hpp"

#include <cmath>
#include <stdexcept>

namespace spalab {

void SpaDist::normalize() {
    double s = total();
    if (s <= 0.0)
        throw std::logic_error("SpaDist::normalize: conditioning event has probability 0");
    for (double& p : probs) p /= s;
}

double flow_utility(double c, double l, const ModelParams& p) {
    if (c <= 0.0) throw std::domain_error("flow_utility: c must be > 0");
    if (l <= 0.0 || l > 1.0) throw std::domain_error("flow_utility: l must be in (0,1]");
    double bundle = std::pow(c, p.nu) * std::pow(l, 1.0 - p.nu);
    return std::pow(bundle, 1.0 - p.gamma) / (1.0 - p.gamma);
}

double bequest_utility(double a, const ModelParams& p) {
    if (a < 0.0) throw std::domain_error("bequest_utility: a must be >= 0");
    double base = a + p.bequestShift;
    if (base <= 0.0) throw std::domain_error("bequest_utility: a + bequestShift must be > 0");
    return p.theta * std::pow(base, p.nu * (1.0 - p.gamma)) / (1.0 - p.gamma);
}

double db_pension(double aime, const DBPensionParams& db) {
    if (aime < 0.0) throw std::domain_error("db_pension: aime must be >= 0");
    if (db.db2 > 0.0) {
        double peak = db.db1 / (2.0 * db.db2);
        if (aime >= peak) return db.db1 * peak - db.db2 * peak * peak;
    }
    return db.db1 * aime - db.db2 * aime * aime;
}

double aime_update(double aimePrev, int workYearIndex, bool worked, double y,
                   const ModelParams& p) {
    if (workYearIndex < 1) throw std::invalid_argument("aime_update: workYearIndex must be >= 1");
    if (aimePrev < 0.0) throw std::domain_error("aime_update: aimePrev must be >= 0");
    int age = p.ageEntry + workYearIndex - 1;
    if (age >= p.aimeFreezeAge) return aimePrev;
    if (worked && y < 0.0) throw std::domain_error("aime_update: y must be >= 0");
    double t = static_cast<double>(workYearIndex);
    return (aimePrev * (t - 1.0) + (worked ? y : 0.0)) / t;
}

double cash_on_hand(double assets, bool working, bool unemployed, bool receiving,
                    int age, double incomeOffer, double aime,
                    const TypeProfile& type, const ModelParams& p) {
    if (assets < 0.0) throw std::domain_error("cash_on_hand: assets must be >= 0");
    double cash = (1.0 + p.r) * assets;
    if (working) cash += incomeOffer;
    if (!working && unemployed) cash += p.benefit;
    if (receiving) cash += p.statePension;
    int spouseAge = age + p.spouseAgeOffset;
    cash += (spouseAge < p.ageSpouseRetire) ? p.spouseIncome : p.statePension;
    if (!working && age >= p.aimeFreezeAge && type.hasDB) cash += db_pension(aime, p.db);
    return cash;
}

SpaDist spa_transition(int spa, bool receiving, const ModelParams& p) {
    if (spa < p.spaInit || spa > p.spaCap)
        throw std::domain_error("spa_transition: spa outside [spaInit, spaCap]");
    SpaDist d;
    d.lo = spa;
    if (receiving || spa == p.spaCap) {
        d.probs = {1.0};
    } else {
        d.probs = {1.0 - p.pSpaStep, p.pSpaStep};
    }
    return d;
}

SpaDist no_receipt_prior(int age, const ModelParams& p) {
    if (age < p.ageEntry || age > p.spaCap - 1)
        throw std::invalid_argument("no_receipt_prior: age outside [ageEntry, spaCap-1]");
    // forward from workforce entry where the SPA is known with certainty,
    // stepping the random walk one year at a time and conditioning on not yet
    // having reached it
    int nSpa = p.spaCap - p.spaInit + 1;
    SpaDist d;
    d.lo = p.spaInit;
    d.probs.assign(nSpa, 0.0);
    d.probs[0] = 1.0;
    for (int a = p.ageEntry + 1; a <= age; ++a) {
        std::vector<double> next(nSpa, 0.0);
        for (int k = 0; k < nSpa; ++k) {
            if (d.probs[k] == 0.0) continue;
            if (p.spaInit + k == p.spaCap) {
                next[k] += d.probs[k];
            } else {
                next[k] += d.probs[k] * (1.0 - p.pSpaStep);
                next[k + 1] += d.probs[k] * p.pSpaStep;
            }
        }
        // no receipt at age a means the SPA still lies above a
        for (int k = 0; k < nSpa; ++k)
            if (p.spaInit + k <= a) next[k] = 0.0;
        d.probs = std::move(next);
        double tot = d.total();
        if (tot <= 0.0)
            throw std::logic_error("no_receipt_prior: conditioning event has probability 0");
        for (double& q : d.probs) q /= tot;
    }
    // trim to the feasible support {max(age+1, spaInit) .. spaCap}
    int lo = std::max(age + 1, p.spaInit);
    int shift = lo - d.lo;
    if (shift > 0) {
        d.probs.erase(d.probs.begin(), d.probs.begin() + shift);
        d.lo = lo;
    }
    return d;
}

void ModelParams::validate(int incomeGridSize) const {
    auto fail = [](const std::string& f, const std::string& why) {
        throw std::invalid_argument(f + ": " + why);
    };
    if (!(gamma > 0.0) || gamma == 1.0) fail("gamma", "must be > 0 and != 1");
    if (!(nu > 0.0 && nu < 1.0)) fail("nu", "must be in (0,1)");
    if (!(beta > 0.0 && beta <= 1.0)) fail("beta", "must be in (0,1]");
    if (theta < 0.0) fail("theta", "must be >= 0");
    if (bequestShift <= 0.0) fail("bequestShift", "must be > 0");
    if (lambda < 0.0) fail("lambda", "must be >= 0");
    if (r <= -1.0) fail("r", "must be > -1");
    if (!(workHours > 0.0 && workHours < 1.0)) fail("workHours", "must be in (0,1)");
    if (benefit < 0.0) fail("benefit", "must be >= 0");
    if (statePension < 0.0) fail("statePension", "must be >= 0");
    if (spouseIncome < 0.0) fail("spouseIncome", "must be >= 0");
    if (!(pSpaStep >= 0.0 && pSpaStep <= 1.0)) fail("pSpaStep", "must be in [0,1]");
    if (!(ageEntry < ageStart)) fail("ageEntry", "must be < ageStart");
    if (!(ageStart < ageWorkEnd)) fail("ageStart", "must be < ageWorkEnd");
    if (!(ageWorkEnd <= ageDeath)) fail("ageWorkEnd", "must be <= ageDeath");
    if (!(spaInit <= spaCap)) fail("spaInit", "must be <= spaCap");
    if (!(spaCap <= ageDeath)) fail("spaCap", "must be <= ageDeath");
    if (spaInit <= ageEntry) fail("spaInit", "must be > ageEntry");
    if (types.empty()) fail("types", "at least one type required");
    double shareSum = 0.0;
    for (size_t i = 0; i < types.size(); ++i) {
        const auto& t = types[i];
        std::string tn = "types[" + std::to_string(i) + "]";
        if (!(t.share > 0.0)) fail(tn + ".share", "must be > 0");
        shareSum += t.share;
        if (!(t.rho >= 0.0 && t.rho < 1.0)) fail(tn + ".rho", "must be in [0,1)");
        if (t.sigmaEps < 0.0) fail(tn + ".sigmaEps", "must be >= 0");
        if (t.sigmaInit < 0.0) fail(tn + ".sigmaInit", "must be >= 0");
        if (static_cast<int>(t.unempProb.size()) != incomeGridSize)
            fail(tn + ".unempProb", "needs one entry per income grid point");
        for (double q : t.unempProb)
            if (!(q >= 0.0 && q <= 1.0)) fail(tn + ".unempProb", "entries must be in [0,1]");
    }
    if (std::abs(shareSum - 1.0) > 1e-12) fail("types", "shares must sum to 1");
    for (int a = mortality.firstStochasticAge; a < ageDeath; ++a) {
        double s = mortality.at(a);
        if (!(s >= 0.0 && s <= 1.0)) fail("mortality", "survival out of [0,1] at age " + std::to_string(a));
    }
}

ModelParams default_params() {
    ModelParams p;

    auto mk = [](std::string label, bool hasDB, double d0, double d1, double d2,
                 double rho, double se, double si, std::vector<double> up, double share) {
        TypeProfile t;
        t.label = std::move(label);
        t.hasDB = hasDB;
        t.delta0 = d0; t.delta1 = d1; t.delta2 = d2;
        t.rho = rho; t.sigmaEps = se; t.sigmaInit = si;
        t.unempProb = std::move(up);
        t.share = share;
        return t;
    };
    // illustrative wage quadratics peaking in the early 50s, pounds per year
    p.types = {
        mk("low-ed",     false, 4.00, 0.220, -0.00215, 0.95, 0.15, 0.30,
           {0.12, 0.08, 0.05, 0.03, 0.02}, 0.30),
        mk("low-ed-db",  true,  4.00, 0.220, -0.00215, 0.95, 0.15, 0.30,
           {0.12, 0.08, 0.05, 0.03, 0.02}, 0.20),
        mk("high-ed",    false, 4.40, 0.225, -0.00218, 0.95, 0.15, 0.30,
           {0.08, 0.05, 0.03, 0.02, 0.01}, 0.25),
        mk("high-ed-db", true,  4.40, 0.225, -0.00218, 0.95, 0.15, 0.30,
           {0.08, 0.05, 0.03, 0.02, 0.01}, 0.25),
    };

    // illustrative female survival curve, Gompertz-shaped from 60 to 104
    p.mortality.firstStochasticAge = 60;
    p.mortality.ageDeath = p.ageDeath;
    p.mortality.survival.resize(p.ageDeath - p.mortality.firstStochasticAge);
    for (int a = p.mortality.firstStochasticAge; a < p.ageDeath; ++a) {
        double q = 0.004 * std::exp(0.095 * (a - 60));
        if (q > 0.6) q = 0.6;
        p.mortality.survival[a - 60] = 1.0 - q;
    }
    return p;
}

} // namespace spalab
