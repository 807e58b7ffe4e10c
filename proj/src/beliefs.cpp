#include "spalab/beliefs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace spalab {

Belief initial_belief(const ModelParams& p) {
    Belief b;
    b.receiving = false;
    b.dist = no_receipt_prior(p.ageStart, p);
    return b;
}

Belief update_belief(const Belief& b, const Solution& rule, int age, int w,
                     int dObserved, bool receiptAtNextAge) {
    const StateSpace& ss = rule.ss;
    const ModelParams& p = ss.params;
    if (age < p.ageStart || age >= p.ageDeath)
        throw std::invalid_argument("update_belief: no decision observed at age " +
                                    std::to_string(age));
    if (w < 0 || w >= ss.nW())
        throw std::invalid_argument("update_belief: W index out of range");
    if (dObserved < 0 || dObserved >= ss.nD())
        throw std::invalid_argument("update_belief: decision index out of range");

    if (b.receiving) {
        if (!receiptAtNextAge)
            throw std::logic_error("update_belief: receipt cannot stop once started");
        return b;
    }

    const int lo = std::max({b.dist.lo, age + 1, p.spaInit});
    const int hi = std::min(b.dist.hi(), p.spaCap);
    double inside = 0.0;
    for (int s = lo; s <= hi; ++s) inside += b.dist.at(s);
    if (!(std::abs(b.dist.total() - 1.0) <= 1e-9) ||
        !(std::abs(inside - 1.0) <= 1e-9))
        throw std::logic_error("update_belief: pending belief must put mass 1 on "
                               "ages the SPA can still be");
    if (hi < lo)
        throw std::logic_error("update_belief: no pending SPA value remains possible");

    // decision likelihood, one rule lookup per pending SPA
    DecisionValues dv = decision_values(rule, age, w);
    SpaDist post;
    post.lo = lo;
    post.probs.assign(static_cast<size_t>(hi - lo + 1), 0.0);
    for (int s = lo; s <= hi; ++s) {
        double pr = b.dist.at(s);
        if (pr <= 0.0) continue;
        std::vector<double> cp = choice_probs(rule, age, ss.slot_of_spa(s), w, dv);
        post.probs[static_cast<size_t>(s - lo)] = pr * cp[dObserved];
    }
    if (post.total() <= 0.0)
        throw std::logic_error("update_belief: observed decision has probability zero "
                               "under every pending SPA");
    post.normalize();

    // one step of the SPA walk
    SpaDist next;
    next.lo = lo;
    next.probs.assign(static_cast<size_t>(std::min(hi + 1, p.spaCap) - lo + 1), 0.0);
    for (int s = lo; s <= hi; ++s) {
        double pr = post.at(s);
        if (pr <= 0.0) continue;
        SpaDist tr = spa_transition(s, false, p);
        for (int s2 = tr.lo; s2 <= tr.hi(); ++s2)
            next.probs[static_cast<size_t>(s2 - next.lo)] += pr * tr.at(s2);
    }

    // costless receipt observation at age+1
    if (receiptAtNextAge) {
        if (next.at(age + 1) <= 0.0)
            throw std::logic_error("update_belief: receipt was believed impossible");
        Belief out;
        out.receiving = true;
        out.spa = age + 1;
        return out;
    }
    for (int s = next.lo; s <= age + 1 && s <= next.hi(); ++s)
        next.probs[static_cast<size_t>(s - next.lo)] = 0.0;
    next.normalize(); // throws when staying pending was believed impossible

    // trim to the positive support
    int first = next.lo, last = next.hi();
    while (first < last && next.at(first) <= 0.0) ++first;
    while (last > first && next.at(last) <= 0.0) --last;
    Belief out;
    out.receiving = false;
    out.dist.lo = first;
    out.dist.probs.assign(next.probs.begin() + (first - next.lo),
                          next.probs.begin() + (last - next.lo + 1));
    return out;
}

BeliefErrorStats belief_error_stats(const std::vector<BeliefObs>& obs) {
    BeliefErrorStats st;
    long exact = 0, within1 = 0, exact58 = 0, within158 = 0;
    for (const BeliefObs& o : obs) {
        int err = o.beliefMode - o.trueSpa;
        ++st.histogram[err];
        ++st.n;
        exact += err == 0;
        within1 += std::abs(err) <= 1;
        if (o.age == 58) {
            ++st.nAt58;
            exact58 += err == 0;
            within158 += std::abs(err) <= 1;
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    st.shareExact = st.n ? static_cast<double>(exact) / st.n : nan;
    st.shareWithin1 = st.n ? static_cast<double>(within1) / st.n : nan;
    st.shareExactAt58 = st.nAt58 ? static_cast<double>(exact58) / st.nAt58 : nan;
    st.shareWithin1At58 = st.nAt58 ? static_cast<double>(within158) / st.nAt58 : nan;
    return st;
}

} // namespace spalab
