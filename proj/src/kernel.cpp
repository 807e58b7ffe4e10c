#include "kernel.hpp"

#include <stdexcept>
#include <string>

namespace spalab::detail {

AgeContext make_age_context(const StateSpace& ss, int age, const std::vector<double>* ec) {
    const ModelParams& p = ss.params;
    AgeContext cx;
    cx.ss = &ss;
    cx.age = age;
    cx.survival = p.mortality.at(age);
    cx.ec = ec;
    cx.offers.resize(ss.nTypes() * ss.nY());
    for (int i = 0; i < ss.nTypes(); ++i)
        for (int y = 0; y < ss.nY(); ++y)
            cx.offers[i * ss.nY() + y] = income_offer(age, p.types[i], ss.chains[i].nodes[y]);
    cx.bequestByA.resize(ss.nA());
    for (int a = 0; a < ss.nA(); ++a) cx.bequestByA[a] = bequest_utility(ss.assets[a], p);
    cx.receivingValid = ss.slot_valid(age, StateSpace::kReceiving);
    for (int slot = 1; slot < ss.nSlots(); ++slot)
        if (ss.slot_valid(age, slot)) cx.nsSlots.push_back(slot);
    return cx;
}

void build_ec(const StateSpace& ss, int ageNext, const std::vector<double>& valueNext,
              std::vector<double>& ec) {
    const int nT = ss.nTypes(), nA = ss.nA(), nY = ss.nY(), nM = ss.nM();
    const int nW = ss.nW();
    ec.assign(static_cast<size_t>(ss.nSlots()) * nT * nY * nA * nM,
              std::numeric_limits<double>::quiet_NaN());
    for (int slot = 0; slot < ss.nSlots(); ++slot) {
        if (!ss.slot_valid(ageNext, slot)) continue;
        const double* v = valueNext.data() + static_cast<size_t>(slot) * nW;
        for (int i = 0; i < nT; ++i) {
            const MarkovChain& mc = ss.chains[i];
            const auto& unemp = ss.params.types[i].unempProb;
            for (int y = 0; y < nY; ++y) {
                double* out = ec.data() + ec_index(ss, slot, i, y, 0, 0);
                for (int a = 0; a < nA; ++a)
                    for (int m = 0; m < nM; ++m) {
                        double acc = 0.0;
                        for (int y2 = 0; y2 < nY; ++y2) {
                            double pyy = mc.p(y, y2);
                            if (pyy == 0.0) continue;
                            double pu = unemp[y2];
                            int base = ss.widx(i, a, y2, m, 0);
                            acc += pyy * ((1.0 - pu) * v[base] + pu * v[base + 1]);
                        }
                        out[a * nM + m] = acc;
                    }
            }
        }
    }
}

void init_age_slab(const StateSpace& ss, Solution::AgeSlab& slab) {
    const size_t n = static_cast<size_t>(ss.nSlots()) * ss.nW();
    slab.value.assign(n, std::numeric_limits<double>::quiet_NaN());
    slab.aPol.assign(n, -1);
    slab.lPol.assign(n, 0);
}

void fill_terminal_slab(const StateSpace& ss, Solution::AgeSlab& slab) {
    init_age_slab(ss, slab);
    const int nW = ss.nW();
    for (int slot = 0; slot < ss.nSlots(); ++slot) {
        if (!ss.slot_valid(ss.params.ageDeath, slot)) continue;
        for (int w = 0; w < nW; ++w) {
            StateSpace::WState st = ss.unpack(w);
            slab.value[static_cast<size_t>(slot) * nW + w] =
                bequest_utility(ss.assets[st.a], ss.params);
        }
    }
}

void store_hard_max(const StateSpace& ss, Solution::AgeSlab& slab, int age, int slot,
                    int w, const double* z) {
    MaxResult mr = hard_max(z, ss.nD());
    if (mr.argmax < 0)
        throw std::domain_error("backward induction: no affordable decision at age " +
                                std::to_string(age) + ", state " + std::to_string(w));
    size_t idx = static_cast<size_t>(slot) * ss.nW() + w;
    slab.value[idx] = mr.value;
    slab.aPol[idx] = static_cast<int16_t>(mr.argmax / 2);
    slab.lPol[idx] = static_cast<int8_t>(mr.argmax % 2);
}

void assemble_w(const AgeContext& cx, int w, WScratch& sc) {
    const StateSpace& ss = *cx.ss;
    const ModelParams& p = ss.params;
    const StateSpace::WState st = ss.unpack(w);
    const int nD = ss.nD();
    const int nK = static_cast<int>(cx.nsSlots.size());
    const int nM = ss.nM();

    sc.zR.assign(nD, kNegInf);
    sc.zNS.assign(static_cast<size_t>(nK) * nD, kNegInf);
    sc.contBuf.resize(ss.nSlots());

    const double offer = cx.offers[st.type * ss.nY() + st.y];
    const double aimeNow = ss.aime[st.m];
    const bool workAllowed = (st.u == 0) && (cx.age < p.ageWorkEnd);
    const double sv = cx.survival;
    const double dieW = 1.0 - sv;
    const bool terminalNext = (cx.ec == nullptr);

    for (int work = 0; work <= 1; ++work) {
        if (work == 1 && !workAllowed) continue;
        const bool working = work == 1;
        const double leisure = working ? 1.0 - p.workHours : 1.0;

        const double mNext =
            aime_update(aimeNow, p.work_year_index(cx.age), working, offer, p);
        const InterpWeight iw = interp_weight(ss.aime, mNext);
        const int mLo = iw.i;
        const int mHi = (iw.w < 1.0 && mLo + 1 < nM) ? mLo + 1 : mLo;

        const double cashNR = cash_on_hand(ss.assets[st.a], working, st.u == 1, false,
                                           cx.age, offer, aimeNow, p.types[st.type], p);
        const double cashR = cx.receivingValid
                                 ? cash_on_hand(ss.assets[st.a], working, st.u == 1, true,
                                                cx.age, offer, aimeNow, p.types[st.type], p)
                                 : 0.0;

        for (int an = 0; an < ss.nA(); ++an) {
            const int d = decision_index(an, working);
            const double beqTerm = p.beta * dieW * cx.bequestByA[an];

            // continuation per next-period slot, shared across this decision
            if (!terminalNext) {
                const std::vector<double>& ec = *cx.ec;
                for (int slot = 0; slot < ss.nSlots(); ++slot) {
                    size_t lo = ec_index(ss, slot, st.type, st.y, an, mLo);
                    size_t hi = ec_index(ss, slot, st.type, st.y, an, mHi);
                    sc.contBuf[slot] = iw.w * ec[lo] + (1.0 - iw.w) * ec[hi];
                }
            } else {
                // next age is past the terminal one; the terminal slab is
                // assigned directly, so this never runs
                std::fill(sc.contBuf.begin(), sc.contBuf.end(), 0.0);
            }

            if (cx.receivingValid) {
                const double c = cashR - ss.assets[an];
                if (c > 0.0) {
                    sc.zR[d] = flow_utility(c, leisure, p) +
                               p.beta * sv * sc.contBuf[StateSpace::kReceiving] + beqTerm;
                }
            }

            const double cNS = cashNR - ss.assets[an];
            if (cNS > 0.0 && nK > 0) {
                const double flowNS = flow_utility(cNS, leisure, p);
                for (int k = 0; k < nK; ++k) {
                    const int spa = ss.spa_of_slot(cx.nsSlots[k]);
                    auto contAt = [&](int s) {
                        return (s <= cx.age + 1) ? sc.contBuf[StateSpace::kReceiving]
                                                 : sc.contBuf[ss.slot_of_spa(s)];
                    };
                    double cont;
                    if (spa == p.spaCap) {
                        cont = contAt(spa);
                    } else {
                        cont = (1.0 - p.pSpaStep) * contAt(spa) + p.pSpaStep * contAt(spa + 1);
                    }
                    sc.zNS[static_cast<size_t>(k) * nD + d] =
                        flowNS + p.beta * sv * cont + beqTerm;
                }
            }
        }
    }
}

} // namespace spalab::detail
