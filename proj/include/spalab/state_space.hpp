#pragma once
#include <cstdint>
#include <vector>

#include "spalab/grids.hpp"
#include "spalab/model.hpp"
#include "spalab/params.hpp"

namespace spalab {

// One labor/saving decision: next-period asset node and whether to work.
// Decisions are indexed d = aNext*2 + (work ? 1 : 0); enumeration order is the
// tie-break order (lower savings first, leisure before work).
struct Decision {
    int aNext = 0;
    bool work = false;
};
inline int decision_index(int aNext, bool work) { return aNext * 2 + (work ? 1 : 0); }

// Full discretized state space. The costlessly observed part of the state
// (type, assets, income shock, career average, unemployment) is packed into a
// single W index; the SPA/receipt part is a "slot": slot 0 = receiving,
// slot 1+k = not yet receiving with SPA = spaInit+k.
struct StateSpace {
    ModelParams params;
    Grid assets;
    Grid aime;
    std::vector<MarkovChain> chains; // one per type, common node count

    int nTypes() const { return static_cast<int>(params.types.size()); }
    int nA() const { return assets.n(); }
    int nY() const { return chains.front().n(); }
    int nM() const { return aime.n(); }
    int nW() const { return nTypes() * nA() * nY() * nM() * 2; }
    int nD() const { return nA() * 2; }

    int widx(int type, int a, int y, int m, int u) const {
        return (((type * nA() + a) * nY() + y) * nM() + m) * 2 + u;
    }
    struct WState {
        int type, a, y, m, u;
    };
    WState unpack(int w) const {
        WState s;
        s.u = w % 2; w /= 2;
        s.m = w % nM(); w /= nM();
        s.y = w % nY(); w /= nY();
        s.a = w % nA(); w /= nA();
        s.type = w;
        return s;
    }

    static constexpr int kReceiving = 0;
    int nSlots() const { return 2 + params.spaCap - params.spaInit; }
    int slot_of_spa(int spa) const { return 1 + spa - params.spaInit; }
    int spa_of_slot(int slot) const { return params.spaInit + slot - 1; }
    bool slot_valid(int age, int slot) const {
        if (slot == kReceiving) return age >= params.spaInit;
        return spa_of_slot(slot) > age;
    }

    int n_ages() const { return params.ageDeath - params.ageStart + 1; }
    int age_index(int age) const { return age - params.ageStart; }
};

// Grid/chain sizes used to build a state space.
struct GridSpec {
    int nAssets = 30;
    double assetMin = 0.0;
    double assetMax = 1.5e6;
    double assetCurv = 3.0;
    int nAime = 3;
    double aimeMin = 0.0;
    double aimeMax = 60000.0;
    double aimeCurv = 2.0;
    int nIncome = 5;
};

StateSpace make_state_space(const ModelParams& params, const GridSpec& gs);

enum class SolveKind : std::uint8_t { RE = 0, RI = 1 };

// Backward-induction output. RE solutions carry values and hard-max policies
// for every valid slot. RI solutions additionally carry, for every age/W-point
// where the attention problem is non-degenerate, the converged default rule q,
// the information flow in nats, and fixed-point diagnostics; policies at those
// points hold the modal decision. Choice probabilities are recomputed on
// demand from q and the stored expected-continuation tables (see ri_solver.hpp).
struct Solution {
    SolveKind kind = SolveKind::RE;
    StateSpace ss;

    struct AgeSlab {
        std::vector<double> value;   // [slot*nW + w], NaN where the slot is invalid
        std::vector<int16_t> aPol;   // hard-max slots: argmax; BA slots: modal decision
        std::vector<int8_t> lPol;    // 0 leisure, 1 work
        std::vector<double> ec;      // expected continuation used at this age (empty at terminal)
        std::vector<double> defaultRule; // RI: [w*nD + d], empty when no BA ran at this age
        std::vector<double> infoFlow;    // RI: [w], nats
        std::vector<double> baResidual;  // RI: [w], final fixed-point residual
        std::vector<int32_t> baIters;    // RI: [w]
        bool hasBA = false;
    };
    std::vector<AgeSlab> ages; // index age - ageStart

    const AgeSlab& slab(int age) const { return ages[ss.age_index(age)]; }
    double value(int age, int slot, int w) const { return slab(age).value[slot * ss.nW() + w]; }
    Decision policy(int age, int slot, int w) const {
        const auto& s = slab(age);
        return {s.aPol[slot * ss.nW() + w], s.lPol[slot * ss.nW() + w] != 0};
    }
};

using SolutionRE = Solution;
using SolutionRI = Solution;

// expected continuation table layout helper: ec[((slot*nT + i)*nY + y)*nA*nM + a*nM + m]
inline int ec_index(const StateSpace& ss, int slot, int type, int y, int a, int m) {
    return ((slot * ss.nTypes() + type) * ss.nY() + y) * ss.nA() * ss.nM() + a * ss.nM() + m;
}

} // namespace spalab
