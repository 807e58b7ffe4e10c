#include "spalab/ri_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "kernel.hpp"
#include "spalab/errors.hpp"

namespace spalab {

namespace {

int argmax_finite(const double* z, int nD) {
    int best = -1;
    double bv = detail::kNegInf;
    for (int d = 0; d < nD; ++d)
        if (std::isfinite(z[d]) && z[d] > bv) { bv = z[d]; best = d; }
    return best;
}

} // namespace

double mutual_information(const std::vector<double>& p, const std::vector<double>& q,
                          const std::vector<double>& mu, int nS, int nD) {
    double info = 0.0;
    for (int s = 0; s < nS; ++s) {
        double kl = 0.0;
        for (int d = 0; d < nD; ++d) {
            double ps = p[static_cast<size_t>(s) * nD + d];
            if (ps <= 0.0) continue;
            if (q[d] <= 0.0) return std::numeric_limits<double>::infinity();
            kl += ps * std::log(ps / q[d]);
        }
        if (kl > 0.0) info += mu[s] * kl; // each row is a KL term, >= 0 exactly
    }
    return info;
}

BAResult ba_fixed_point(const std::vector<double>& z, int nS, int nD,
                        const std::vector<double>& mu, double lambda,
                        const BAOptions& opts, const std::vector<double>* warmStart) {
    if (nS < 1 || nD < 1) throw std::invalid_argument("ba_fixed_point: empty problem");
    if (z.size() != static_cast<size_t>(nS) * nD)
        throw std::invalid_argument("ba_fixed_point: z size mismatch");
    if (mu.size() != static_cast<size_t>(nS))
        throw std::invalid_argument("ba_fixed_point: mu size mismatch");
    if (!(lambda > 0.0)) throw std::invalid_argument("ba_fixed_point: lambda must be > 0");
    double muSum = 0.0;
    for (double m : mu) {
        if (!(m > 0.0)) throw std::invalid_argument("ba_fixed_point: mu must be strictly positive");
        muSum += m;
    }
    if (std::abs(muSum - 1.0) > 1e-9)
        throw std::invalid_argument("ba_fixed_point: mu must sum to 1");

    std::vector<char> feas(nD, 0);
    int nFeas = 0;
    for (int d = 0; d < nD; ++d) {
        feas[d] = std::isfinite(z[d]) ? 1 : 0;
        nFeas += feas[d];
    }
    for (int s = 1; s < nS; ++s)
        for (int d = 0; d < nD; ++d)
            if ((std::isfinite(z[static_cast<size_t>(s) * nD + d]) ? 1 : 0) != feas[d])
                throw std::invalid_argument("ba_fixed_point: feasible set varies with the state");
    if (nFeas == 0) throw std::domain_error("ba_fixed_point: no feasible decision");

    // row max and scaled exponentials: E in [0,1], at least one 1 per row
    std::vector<double> M(nS), E(static_cast<size_t>(nS) * nD, 0.0);
    for (int s = 0; s < nS; ++s) {
        const double* zrow = z.data() + static_cast<size_t>(s) * nD;
        double m = detail::kNegInf;
        for (int d = 0; d < nD; ++d)
            if (feas[d] && zrow[d] > m) m = zrow[d];
        M[s] = m;
        double* erow = E.data() + static_cast<size_t>(s) * nD;
        for (int d = 0; d < nD; ++d)
            if (feas[d]) erow[d] = std::exp((zrow[d] - m) / lambda);
    }

    BAResult r;
    r.q.assign(nD, 0.0);
    const double uni = 1.0 / nFeas;
    for (int d = 0; d < nD; ++d)
        if (feas[d]) r.q[d] = uni;
    if (warmStart) {
        if (warmStart->size() != static_cast<size_t>(nD))
            throw std::invalid_argument("ba_fixed_point: warm start size mismatch");
        double wSum = 0.0;
        for (int d = 0; d < nD; ++d)
            if (feas[d] && (*warmStart)[d] > 0.0) wSum += (*warmStart)[d];
        if (wSum > 0.0)
            for (int d = 0; d < nD; ++d) {
                double wq = feas[d] && (*warmStart)[d] > 0.0 ? (*warmStart)[d] / wSum : 0.0;
                r.q[d] = feas[d] ? 0.5 * wq + 0.5 * uni : 0.0;
            }
    }

    int it = 0;
    auto update = [&](const std::vector<double>& qIn, std::vector<double>& qOut) {
        ++it;
        std::fill(qOut.begin(), qOut.end(), 0.0);
        for (int s = 0; s < nS; ++s) {
            const double* erow = E.data() + static_cast<size_t>(s) * nD;
            double dn = 0.0;
            for (int d = 0; d < nD; ++d) dn += qIn[d] * erow[d];
            if (dn > 0.0) {
                double scale = mu[s] / dn;
                for (int d = 0; d < nD; ++d) qOut[d] += scale * (qIn[d] * erow[d]);
            } else {
                // every carried decision underflowed in this row; the exact
                // iterate would pile the row's mass on its optimum
                qOut[argmax_finite(z.data() + static_cast<size_t>(s) * nD, nD)] += mu[s];
            }
        }
        double res = 0.0;
        for (int d = 0; d < nD; ++d) res = std::max(res, std::abs(qOut[d] - qIn[d]));
        return res;
    };

    // Three-step cycles: two plain marginal updates, then a vector-
    // extrapolated trial in the style of squared iterative schemes. The trial
    // is kept only when its own update moves less than the plain one, so a
    // bad extrapolation costs one update and changes nothing.
    std::vector<double> q0 = r.q, q1(nD), q2(nD), qx(nD), q3(nD);
    double res = std::numeric_limits<double>::infinity();
    r.converged = false;
    while (it < opts.maxIters) {
        res = update(q0, q1);
        if (res <= opts.tol || it >= opts.maxIters) {
            q0 = q1;
            break;
        }
        res = update(q1, q2);
        if (res <= opts.tol || it >= opts.maxIters) {
            q0 = q2;
            break;
        }

        double rr = 0.0, vv = 0.0;
        for (int d = 0; d < nD; ++d) {
            double rd = q1[d] - q0[d];
            double vd = q2[d] - 2.0 * q1[d] + q0[d];
            rr += rd * rd;
            vv += vd * vd;
        }
        if (!(vv > 0.0)) {
            q0 = q2;
            continue;
        }
        double alpha = -std::sqrt(rr / vv);
        if (alpha > -1.0) alpha = -1.0; // never undershoot the plain iterate
        if (alpha < -1e100) alpha = -1e100;

        double sum = 0.0;
        for (int d = 0; d < nD; ++d) {
            double rd = q1[d] - q0[d];
            double vd = q2[d] - 2.0 * q1[d] + q0[d];
            double qf = q0[d] - 2.0 * alpha * rd + alpha * alpha * vd;
            // an overshoot may leave the simplex; a dead decision stays dead,
            // a live one keeps a sliver so the update can regrow it
            if (!(qf > 0.0)) qf = q2[d] * 1e-12;
            qx[d] = qf;
            sum += qf;
        }
        if (!(sum > 0.0)) {
            q0 = q2;
            continue;
        }
        for (int d = 0; d < nD; ++d) qx[d] /= sum;

        double resAcc = update(qx, q3);
        if (resAcc <= res) {
            q0 = q3;
            res = resAcc;
            if (res <= opts.tol) break;
        } else {
            q0 = q2;
        }
    }
    r.q = q0;
    r.residual = res;
    r.converged = res <= opts.tol;
    r.iters = it;

    // final Gibbs response to the converged rule; choice_probs repeats these
    // exact operations, so reconstruction is bit-identical
    r.p.assign(static_cast<size_t>(nS) * nD, 0.0);
    r.v.assign(nS, 0.0);
    for (int s = 0; s < nS; ++s) {
        double* prow = r.p.data() + static_cast<size_t>(s) * nD;
        const double* erow = E.data() + static_cast<size_t>(s) * nD;
        double dn = 0.0;
        for (int d = 0; d < nD; ++d) {
            double t = r.q[d] * erow[d];
            prow[d] = t;
            dn += t;
        }
        if (dn > 0.0) {
            for (int d = 0; d < nD; ++d) prow[d] /= dn;
            r.v[s] = M[s] + lambda * std::log(dn);
        } else {
            int dstar = argmax_finite(z.data() + static_cast<size_t>(s) * nD, nD);
            std::fill(prow, prow + nD, 0.0);
            prow[dstar] = 1.0;
            r.v[s] = M[s];
        }
    }
    r.info = mutual_information(r.p, r.q, mu, nS, nD);
    return r;
}

std::vector<double> pending_spa_weights(const StateSpace& ss, int age) {
    const ModelParams& p = ss.params;
    std::vector<int> slots;
    for (int slot = 1; slot < ss.nSlots(); ++slot)
        if (ss.slot_valid(age, slot)) slots.push_back(slot);
    if (slots.empty() || age < p.ageEntry || age > p.spaCap - 1) return {};
    SpaDist prior;
    try {
        prior = no_receipt_prior(age, p);
    } catch (const std::logic_error&) {
        return {}; // staying short of the SPA this long has probability zero
    }
    std::vector<double> mu(slots.size(), 0.0);
    double sum = 0.0;
    for (size_t k = 0; k < slots.size(); ++k) {
        mu[k] = prior.at(ss.spa_of_slot(slots[k]));
        sum += mu[k];
    }
    if (sum <= 0.0) return {};
    for (double& m : mu) m /= sum;
    return mu;
}

namespace {

struct RiAgePlan {
    std::vector<double> muFull; // aligned with cx.nsSlots, empty when measure zero
    std::vector<int> eff;       // indices into cx.nsSlots with positive prior
    std::vector<double> muEff;  // compacted, renormalized
    bool doBA = false;
};

RiAgePlan plan_ri_age(const StateSpace& ss, int age, int nK) {
    RiAgePlan plan;
    plan.muFull = pending_spa_weights(ss, age);
    if (!plan.muFull.empty())
        for (int k = 0; k < nK; ++k)
            if (plan.muFull[k] > 0.0) plan.eff.push_back(k);
    plan.doBA = plan.eff.size() >= 2;
    if (plan.doBA) {
        double sum = 0.0;
        for (int k : plan.eff) sum += plan.muFull[k];
        for (int k : plan.eff) plan.muEff.push_back(plan.muFull[k] / sum);
    }
    return plan;
}

} // namespace

SolutionRI solve_ri(const StateSpace& ss, const SolveOptions& opts,
                    const BAOptions& baOpts) {
    const ModelParams& p = ss.params;
    if (!(p.lambda > 0.0))
        throw std::invalid_argument("solve_ri: lambda must be > 0");
    const int nW = ss.nW();
    const int nD = ss.nD();

    Solution sol;
    sol.kind = SolveKind::RI;
    sol.ss = ss;
    sol.ages.resize(ss.n_ages());
    detail::fill_terminal_slab(ss, sol.ages.back());

    for (int age = p.ageDeath - 1; age >= p.ageStart; --age) {
        Solution::AgeSlab& slab = sol.ages[ss.age_index(age)];
        const Solution::AgeSlab& next = sol.ages[ss.age_index(age + 1)];
        detail::build_ec(ss, age + 1, next.value, slab.ec);
        detail::init_age_slab(ss, slab);
        detail::AgeContext cx = detail::make_age_context(ss, age, &slab.ec);
        const int nK = static_cast<int>(cx.nsSlots.size());

        RiAgePlan plan = plan_ri_age(ss, age, nK);
        if (plan.doBA) {
            slab.defaultRule.assign(static_cast<size_t>(nW) * nD, 0.0);
            slab.infoFlow.assign(nW, 0.0);
            slab.baResidual.assign(nW, 0.0);
            slab.baIters.assign(nW, 0);
            slab.hasBA = true;
        }
        // the adjacent older age's rule makes a cheap starting guess
        const std::vector<double>* warmTable = next.hasBA ? &next.defaultRule : nullptr;

        detail::sweep_w(nW, opts.parallel, opts.workers, [&](int w, detail::WScratch& sc) {
            detail::assemble_w(cx, w, sc);
            if (cx.receivingValid)
                detail::store_hard_max(ss, slab, age, StateSpace::kReceiving, w, sc.zR.data());
            if (!plan.doBA) {
                for (int k = 0; k < nK; ++k)
                    detail::store_hard_max(ss, slab, age, cx.nsSlots[k], w,
                                           sc.zNS.data() + static_cast<size_t>(k) * nD);
                return;
            }
            // measure-zero pending slots keep the hard-max rule
            size_t ei = 0;
            for (int k = 0; k < nK; ++k) {
                if (ei < plan.eff.size() && plan.eff[ei] == k) { ++ei; continue; }
                detail::store_hard_max(ss, slab, age, cx.nsSlots[k], w,
                                       sc.zNS.data() + static_cast<size_t>(k) * nD);
            }

            const int nEff = static_cast<int>(plan.eff.size());
            std::vector<double> zEff(static_cast<size_t>(nEff) * nD);
            for (int j = 0; j < nEff; ++j)
                std::memcpy(zEff.data() + static_cast<size_t>(j) * nD,
                            sc.zNS.data() + static_cast<size_t>(plan.eff[j]) * nD,
                            sizeof(double) * nD);

            std::vector<double> warm;
            const std::vector<double>* warmPtr = nullptr;
            if (warmTable) {
                warm.assign(warmTable->begin() + static_cast<size_t>(w) * nD,
                            warmTable->begin() + static_cast<size_t>(w + 1) * nD);
                warmPtr = &warm;
            }

            BAResult r = ba_fixed_point(zEff, nEff, nD, plan.muEff, p.lambda, baOpts, warmPtr);
            if (!r.converged && r.residual > baOpts.tol * 1e4)
                throw ConvergenceError("solve_ri: attention fixed point stalled at age " +
                                           std::to_string(age) + ", state " + std::to_string(w),
                                       r.residual, r.iters);

            for (int j = 0; j < nEff; ++j) {
                const int slot = cx.nsSlots[plan.eff[j]];
                const size_t idx = static_cast<size_t>(slot) * nW + w;
                slab.value[idx] = r.v[j];
                const double* prow = r.p.data() + static_cast<size_t>(j) * nD;
                int dstar = 0;
                double bp = -1.0;
                for (int d = 0; d < nD; ++d)
                    if (prow[d] > bp) { bp = prow[d]; dstar = d; }
                slab.aPol[idx] = static_cast<int16_t>(dstar / 2);
                slab.lPol[idx] = static_cast<int8_t>(dstar % 2);
            }
            std::memcpy(slab.defaultRule.data() + static_cast<size_t>(w) * nD, r.q.data(),
                        sizeof(double) * nD);
            slab.infoFlow[w] = r.info;
            slab.baResidual[w] = r.residual;
            slab.baIters[w] = r.iters;
        });
    }
    return sol;
}

DecisionValues decision_values(const Solution& sol, int age, int w) {
    const StateSpace& ss = sol.ss;
    const ModelParams& p = ss.params;
    if (age < p.ageStart || age >= p.ageDeath)
        throw std::invalid_argument("decision_values: no decisions at age " +
                                    std::to_string(age));
    if (w < 0 || w >= ss.nW())
        throw std::invalid_argument("decision_values: W index out of range");
    const Solution::AgeSlab& slab = sol.slab(age);
    detail::AgeContext cx = detail::make_age_context(ss, age, &slab.ec);
    detail::WScratch sc;
    detail::assemble_w(cx, w, sc);
    DecisionValues dv;
    if (cx.receivingValid) dv.zR = std::move(sc.zR);
    dv.zNS = std::move(sc.zNS);
    dv.nsSlots = cx.nsSlots;
    return dv;
}

std::vector<double> choice_probs(const Solution& sol, int age, int slot, int w) {
    return choice_probs(sol, age, slot, w, decision_values(sol, age, w));
}

std::vector<double> choice_probs(const Solution& sol, int age, int slot, int w,
                                 const DecisionValues& dv) {
    const StateSpace& ss = sol.ss;
    const ModelParams& p = ss.params;
    const int nD = ss.nD();
    if (age < p.ageStart || age >= p.ageDeath)
        throw std::invalid_argument("choice_probs: no decisions at age " +
                                    std::to_string(age));
    if (!ss.slot_valid(age, slot))
        throw std::invalid_argument("choice_probs: slot not valid at this age");
    if (w < 0 || w >= ss.nW())
        throw std::invalid_argument("choice_probs: W index out of range");

    const Solution::AgeSlab& slab = sol.slab(age);
    std::vector<double> out(nD, 0.0);
    auto point_mass = [&]() {
        Decision dec = sol.policy(age, slot, w);
        out[decision_index(dec.aNext, dec.work)] = 1.0;
        return out;
    };
    if (sol.kind == SolveKind::RE || slot == StateSpace::kReceiving || !slab.hasBA)
        return point_mass();

    std::vector<double> mu = pending_spa_weights(ss, age);
    int k = -1, nPos = 0;
    double muK = 0.0;
    {
        int idx = 0;
        for (int s2 = 1; s2 < ss.nSlots(); ++s2) {
            if (!ss.slot_valid(age, s2)) continue;
            if (!mu.empty() && mu[idx] > 0.0) ++nPos;
            if (s2 == slot) {
                k = idx;
                muK = mu.empty() ? 0.0 : mu[idx];
            }
            ++idx;
        }
    }
    if (k < 0 || muK <= 0.0 || nPos < 2) return point_mass();

    if (dv.zNS.size() != static_cast<size_t>(dv.nsSlots.size()) * nD ||
        static_cast<size_t>(k) >= dv.nsSlots.size() || dv.nsSlots[k] != slot)
        throw std::invalid_argument("choice_probs: decision-value bundle does not match");
    const double* zrow = dv.zNS.data() + static_cast<size_t>(k) * nD;
    const double* q = slab.defaultRule.data() + static_cast<size_t>(w) * nD;

    // same operations, in the same order, as the fixed point's final pass
    double M = detail::kNegInf;
    for (int d = 0; d < nD; ++d)
        if (std::isfinite(zrow[d]) && zrow[d] > M) M = zrow[d];
    double dn = 0.0;
    for (int d = 0; d < nD; ++d) {
        double t = std::isfinite(zrow[d]) ? q[d] * std::exp((zrow[d] - M) / p.lambda) : 0.0;
        out[d] = t;
        dn += t;
    }
    if (dn > 0.0) {
        for (int d = 0; d < nD; ++d) out[d] /= dn;
    } else {
        std::fill(out.begin(), out.end(), 0.0);
        out[argmax_finite(zrow, nD)] = 1.0;
    }
    return out;
}

} // namespace spalab
