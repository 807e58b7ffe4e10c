#pragma once
#include <cmath>

#include "spalab/params.hpp"

namespace spalab {

// Discrete distribution over integer SPA values [lo, lo + probs.size()).
struct SpaDist {
    int lo = 0;
    std::vector<double> probs;

    int hi() const { return lo + static_cast<int>(probs.size()) - 1; }
    double at(int spa) const {
        int k = spa - lo;
        if (k < 0 || k >= static_cast<int>(probs.size())) return 0.0;
        return probs[k];
    }
    double total() const {
        double s = 0.0;
        for (double p : probs) s += p;
        return s;
    }
    // most likely value, ties resolved toward the lower SPA
    int mode() const {
        int best = lo;
        double bp = -1.0;
        for (int k = 0; k < static_cast<int>(probs.size()); ++k)
            if (probs[k] > bp) { bp = probs[k]; best = lo + k; }
        return best;
    }
    void normalize(); // throws std::logic_error if total mass is 0
};

// period utility of consumption c > 0 and leisure l in (0,1]
double flow_utility(double c, double l, const ModelParams& p);

// warm-glow utility of leaving assets a >= 0 at death
double bequest_utility(double a, const ModelParams& p);

// annual DB pension for a career-average wage aime >= 0
double db_pension(double aime, const DBPensionParams& db);

// career-average update; workYearIndex counts years since workforce entry
// (entry year = 1). Frozen from the freeze age on.
double aime_update(double aimePrev, int workYearIndex, bool worked, double y,
                   const ModelParams& p);

// resources available to split between consumption and next-period assets
double cash_on_hand(double assets, bool working, bool unemployed, bool receiving,
                    int age, double incomeOffer, double aime,
                    const TypeProfile& type, const ModelParams& p);

// one-step law of motion of the SPA; frozen once receipt has started
SpaDist spa_transition(int spa, bool receiving, const ModelParams& p);

// distribution of the current SPA conditional on no receipt by the given age,
// built by the forward recursion from workforce entry (SPA certain there)
SpaDist no_receipt_prior(int age, const ModelParams& p);

// age-dependent deterministic part of the income offer
inline double income_offer(int age, const TypeProfile& type, double epsNode) {
    double a = static_cast<double>(age);
    return std::exp(type.delta0 + type.delta1 * a + type.delta2 * a * a + epsNode);
}

} // namespace spalab
