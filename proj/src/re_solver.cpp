#include "spalab/re_solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kernel.hpp"

namespace spalab {

using detail::AgeContext;
using detail::WScratch;

std::vector<Decision> feasible_choices(const StateSpace& ss, int age,
                                       const StateSpace::WState& st, bool receiving) {
    const ModelParams& p = ss.params;
    const double offer = income_offer(age, p.types[st.type], ss.chains[st.type].nodes[st.y]);
    const double aimeNow = ss.aime[st.m];
    const bool workAllowed = (st.u == 0) && (age < p.ageWorkEnd);
    std::vector<Decision> out;
    for (int an = 0; an < ss.nA(); ++an)
        for (int work = 0; work <= 1; ++work) {
            if (work == 1 && !workAllowed) continue;
            double cash = cash_on_hand(ss.assets[st.a], work == 1, st.u == 1, receiving,
                                       age, offer, aimeNow, p.types[st.type], p);
            if (cash - ss.assets[an] > 0.0) out.push_back({an, work == 1});
        }
    return out;
}

namespace {

void re_cell(const AgeContext& cx, Solution::AgeSlab& slab, int w, WScratch& sc) {
    const StateSpace& ss = *cx.ss;
    detail::assemble_w(cx, w, sc);
    if (cx.receivingValid)
        detail::store_hard_max(ss, slab, cx.age, StateSpace::kReceiving, w, sc.zR.data());
    for (size_t k = 0; k < cx.nsSlots.size(); ++k)
        detail::store_hard_max(ss, slab, cx.age, cx.nsSlots[k], w,
                               sc.zNS.data() + k * ss.nD());
}

} // namespace

SolutionRE solve_re(const StateSpace& ss, const SolveOptions& opts) {
    const ModelParams& p = ss.params;
    const int nW = ss.nW();

    Solution sol;
    sol.kind = SolveKind::RE;
    sol.ss = ss;
    sol.ages.resize(ss.n_ages());
    detail::fill_terminal_slab(ss, sol.ages.back());

    for (int age = p.ageDeath - 1; age >= p.ageStart; --age) {
        Solution::AgeSlab& slab = sol.ages[ss.age_index(age)];
        const Solution::AgeSlab& next = sol.ages[ss.age_index(age + 1)];
        detail::build_ec(ss, age + 1, next.value, slab.ec);
        detail::init_age_slab(ss, slab);
        AgeContext cx = detail::make_age_context(ss, age, &slab.ec);
        detail::sweep_w(nW, opts.parallel, opts.workers,
                        [&](int w, WScratch& sc) { re_cell(cx, slab, w, sc); });
    }
    return sol;
}

namespace {

struct BruteForce {
    const StateSpace& ss;
    const ModelParams& p;
    int type;
    long maxNodes;
    long nodes = 0;

    void bump() {
        if (++nodes > maxNodes)
            throw std::invalid_argument(
                "brute_force_value: event tree exceeds " + std::to_string(maxNodes) +
                " nodes; instance too large to enumerate");
    }

    double value(int age, int a, int y, int u, int spa, bool receiving, double aime) {
        bump();
        if (age == p.ageDeath) return bequest_utility(ss.assets[a], p);

        const MarkovChain& mc = ss.chains[type];
        const double offer = income_offer(age, p.types[type], mc.nodes[y]);
        const double sv = p.mortality.at(age);
        const bool workAllowed = (u == 0) && (age < p.ageWorkEnd);
        double best = -std::numeric_limits<double>::infinity();
        bool any = false;

        for (int an = 0; an < ss.nA(); ++an)
            for (int work = 0; work <= 1; ++work) {
                if (work == 1 && !workAllowed) continue;
                const bool working = work == 1;
                double cash = cash_on_hand(ss.assets[a], working, u == 1, receiving,
                                           age, offer, aime, p.types[type], p);
                double c = cash - ss.assets[an];
                if (c <= 0.0) continue;
                double total = flow_utility(c, working ? 1.0 - p.workHours : 1.0, p);
                double aimeNext =
                    aime_update(aime, p.work_year_index(age), working, offer, p);

                if (sv > 0.0) {
                    double ev = 0.0;
                    for (int y2 = 0; y2 < mc.n(); ++y2) {
                        double pyy = mc.p(y, y2);
                        if (pyy == 0.0) continue;
                        double pu = p.types[type].unempProb[y2];
                        for (int u2 = 0; u2 <= 1; ++u2) {
                            double puu = u2 == 1 ? pu : 1.0 - pu;
                            if (puu == 0.0) continue;
                            SpaDist step = spa_transition(spa, receiving, p);
                            for (int s2 = step.lo; s2 <= step.hi(); ++s2) {
                                double ps = step.at(s2);
                                if (ps == 0.0) continue;
                                bool recv2 = receiving || s2 <= age + 1;
                                ev += pyy * puu * ps *
                                      value(age + 1, an, y2, u2, s2, recv2, aimeNext);
                            }
                        }
                    }
                    total += p.beta * sv * ev;
                }
                total += p.beta * (1.0 - sv) * bequest_utility(ss.assets[an], p);

                if (!any || total > best) { best = total; any = true; }
            }

        if (!any)
            throw std::domain_error("brute_force_value: no affordable decision at age " +
                                    std::to_string(age));
        return best;
    }
};

} // namespace

double brute_force_value(const StateSpace& ss, const BruteForceStart& s0, long maxNodes) {
    const ModelParams& p = ss.params;
    if (s0.type < 0 || s0.type >= ss.nTypes() || s0.a < 0 || s0.a >= ss.nA() ||
        s0.y < 0 || s0.y >= ss.nY() || s0.m < 0 || s0.m >= ss.nM() ||
        (s0.u != 0 && s0.u != 1))
        throw std::invalid_argument("brute_force_value: start indices out of range");
    if (s0.age < p.ageStart || s0.age > p.ageDeath)
        throw std::invalid_argument("brute_force_value: start age out of range");
    if (s0.spa < p.spaInit || s0.spa > p.spaCap)
        throw std::invalid_argument("brute_force_value: start spa out of range");
    if (s0.receiving && s0.age < p.spaInit)
        throw std::invalid_argument("brute_force_value: receipt cannot start before spaInit");
    if (!s0.receiving && s0.spa <= s0.age)
        throw std::invalid_argument("brute_force_value: a reached SPA must be receiving");

    BruteForce bf{ss, p, s0.type, maxNodes};
    return bf.value(s0.age, s0.a, s0.y, s0.u, s0.spa, s0.receiving, ss.aime[s0.m]);
}

} // namespace spalab
