#include "spalab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

#include "kernel.hpp"
#include "spalab/errors.hpp"
#include "spalab/model.hpp"
#include "spalab/ri_solver.hpp"
#include "spalab/rng.hpp"

namespace spalab {

std::vector<CohortPath> constant_cohorts(const std::vector<int>& spas) {
    std::vector<CohortPath> out;
    out.reserve(spas.size());
    for (int s : spas) out.push_back({"spa" + std::to_string(s), {s}});
    return out;
}

namespace {

int path_spa_at(const CohortPath& c, int age, int ageStart) {
    int k = age - ageStart;
    int last = static_cast<int>(c.spaByAge.size()) - 1;
    return c.spaByAge[static_cast<size_t>(std::clamp(k, 0, last))];
}

double draw_normal(CounterRng& rng) {
    // Box-Muller with a fixed two-draw budget
    double u1 = rng.next_double();
    double u2 = rng.next_double();
    u1 = std::max(u1, 0x1.0p-53); // keep log() off the lattice edge
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

std::span<const double> trans_row(const MarkovChain& chain, int y) {
    return {chain.trans.data() + static_cast<size_t>(y) * chain.n(),
            static_cast<size_t>(chain.n())};
}

void validate_scenario(const Solution& sol, const ScenarioSpec& sc) {
    const ModelParams& p = sol.ss.params;
    if (sc.kind != sol.kind)
        throw ConfigError("scenario.solution_kind",
                          "scenario and solution disagree about RE vs RI");
    if (sc.cohorts.empty())
        throw ConfigError("scenario.cohort_spas", "at least one cohort is required");
    if (sc.householdsPerCohort < 1)
        throw ConfigError("scenario.households_per_cohort", "must be >= 1");
    if (sc.ageEnd < p.ageStart || sc.ageEnd >= p.ageDeath)
        throw ConfigError("scenario.panel_age_end",
                          "must lie in [" + std::to_string(p.ageStart) + ", " +
                              std::to_string(p.ageDeath - 1) + "]");
    if (!std::isfinite(sc.initAssetsLogMean))
        throw ConfigError("scenario.init_assets_log_mean", "must be finite");
    if (!(sc.initAssetsLogSd >= 0.0) || !std::isfinite(sc.initAssetsLogSd))
        throw ConfigError("scenario.init_assets_log_sd", "must be >= 0");
    if (!(sc.initAimeFactor >= 0.0) || !std::isfinite(sc.initAimeFactor))
        throw ConfigError("scenario.init_aime_factor", "must be >= 0");
    if (sc.spaMode == ScenarioSpec::SpaMode::Paths)
        for (const CohortPath& c : sc.cohorts) {
            if (c.spaByAge.empty())
                throw ConfigError("scenario.cohort_spas",
                                  "cohort '" + c.label + "' has no SPA path");
            for (size_t k = 0; k < c.spaByAge.size(); ++k) {
                int s = c.spaByAge[k];
                if (s < p.spaInit || s > p.spaCap)
                    throw ConfigError("scenario.cohort_spas",
                                      "cohort '" + c.label + "' leaves [" +
                                          std::to_string(p.spaInit) + ", " +
                                          std::to_string(p.spaCap) + "]");
                if (k > 0 && (s < c.spaByAge[k - 1] || s > c.spaByAge[k - 1] + 1))
                    throw ConfigError("scenario.cohort_spas",
                                      "cohort '" + c.label +
                                          "' must be non-decreasing in unit steps");
            }
        }
}

} // namespace

Panel simulate_panel(const Solution& sol, const ScenarioSpec& sc,
                     const SolveOptions& run) {
    validate_scenario(sol, sc);
    const StateSpace& ss = sol.ss;
    const ModelParams& p = ss.params;
    const bool ri = sol.kind == SolveKind::RI;
    const int nCoh = static_cast<int>(sc.cohorts.size());
    const int H = nCoh * sc.householdsPerCohort;
    const int stopAge = sc.ageEnd;

    std::vector<double> typeShares(p.types.size());
    for (size_t t = 0; t < p.types.size(); ++t) typeShares[t] = p.types[t].share;

    std::vector<std::vector<PanelRecord>> buf(static_cast<size_t>(H));

    detail::sweep_w(H, run.parallel, run.workers, [&](int h, detail::WScratch&) {
        const int cohort = h / sc.householdsPerCohort;
        const CohortPath& path = sc.cohorts[static_cast<size_t>(cohort)];
        CounterRng exog(sc.seed, 2ull * static_cast<std::uint64_t>(h));
        CounterRng choice(sc.seed, 2ull * static_cast<std::uint64_t>(h) + 1ull);

        const int type = exog.next_discrete(typeShares);
        const TypeProfile& tp = p.types[static_cast<size_t>(type)];
        const MarkovChain& chain = ss.chains[static_cast<size_t>(type)];

        double assets0 =
            std::exp(sc.initAssetsLogMean + sc.initAssetsLogSd * draw_normal(exog));
        int aIdx = snap_down(ss.assets, std::max(assets0, ss.assets.min()));
        int y = exog.next_discrete(chain.initial);
        int u = exog.next_bernoulli(tp.unempProb[static_cast<size_t>(y)]) ? 1 : 0;
        double aime = sc.initAimeFactor * income_offer(p.ageStart, tp, chain.nodes[y]);

        int spa;
        if (sc.spaMode == ScenarioSpec::SpaMode::Paths) {
            spa = path_spa_at(path, p.ageStart, p.ageStart);
        } else {
            spa = p.spaInit;
            for (int a = p.ageEntry; a < p.ageStart; ++a)
                if (spa < p.spaCap && exog.next_bernoulli(p.pSpaStep)) ++spa;
        }
        bool receiving = p.ageStart >= spa;

        Belief belief;
        if (ri) {
            if (receiving) {
                belief.receiving = true;
                belief.spa = spa;
            } else {
                belief = initial_belief(p);
            }
        }

        std::vector<PanelRecord>& rows = buf[static_cast<size_t>(h)];
        rows.reserve(static_cast<size_t>(stopAge - p.ageStart + 1));
        for (int age = p.ageStart; age <= stopAge; ++age) {
            const double offer = income_offer(age, tp, chain.nodes[y]);
            const int mIdx = snap_nearest(ss.aime, aime);
            const int w = ss.widx(type, aIdx, y, mIdx, u);
            const int slot = receiving ? StateSpace::kReceiving : ss.slot_of_spa(spa);

            int d;
            if (ri) {
                std::vector<double> cp = choice_probs(sol, age, slot, w);
                // clip trailing zero-probability (infeasible) decisions so the
                // rounding-remainder fallthrough cannot land on one
                size_t nPos = cp.size();
                while (nPos > 1 && !(cp[nPos - 1] > 0.0)) --nPos;
                d = choice.next_discrete(std::span<const double>(cp.data(), nPos));
            } else {
                Decision dec = sol.policy(age, slot, w);
                d = decision_index(dec.aNext, dec.work);
            }
            const int aNext = d / 2;
            const bool worked = d % 2 != 0;

            const double cash = cash_on_hand(ss.assets[aIdx], worked, u == 1,
                                             receiving, age, offer, aime, tp, p);
            PanelRecord r;
            r.householdId = h;
            r.cohort = cohort;
            r.age = age;
            r.typeId = type;
            r.assets = ss.assets[aIdx];
            r.incomeOffer = offer;
            r.unemployed = u == 1;
            r.worked = worked;
            r.consumption = cash - ss.assets[aNext];
            r.aime = aime;
            r.nextAssets = ss.assets[aNext];
            r.receiving = receiving;
            r.trueSpa = spa;
            if (ri) {
                r.beliefMode = belief.mode();
                r.beliefModeProb = belief.mode_prob();
            }
            rows.push_back(r);
            if (age == stopAge) break;

            // state transitions into age+1
            aime = aime_update(aime, p.work_year_index(age), worked, offer, p);
            aIdx = aNext;
            y = exog.next_discrete(trans_row(chain, y));
            u = exog.next_bernoulli(tp.unempProb[static_cast<size_t>(y)]) ? 1 : 0;
            if (!receiving) {
                if (sc.spaMode == ScenarioSpec::SpaMode::Paths) {
                    spa = path_spa_at(path, age + 1, p.ageStart);
                } else if (spa < p.spaCap && exog.next_bernoulli(p.pSpaStep)) {
                    ++spa;
                }
                if (age + 1 >= spa) receiving = true;
            }
            if (ri) belief = update_belief(belief, sol, age, w, d, receiving);
            if (sc.mortality && !exog.next_bernoulli(p.mortality.at(age))) break;
        }
    });

    Panel panel;
    panel.seed = sc.seed;
    panel.kind = sol.kind;
    panel.householdsPerCohort = sc.householdsPerCohort;
    for (const CohortPath& c : sc.cohorts) panel.cohortLabels.push_back(c.label);
    size_t total = 0;
    for (const auto& rows : buf) total += rows.size();
    panel.rows.reserve(total);
    for (const auto& rows : buf)
        panel.rows.insert(panel.rows.end(), rows.begin(), rows.end());
    return panel;
}

std::vector<BeliefObs> panel_belief_obs(const Panel& panel) {
    std::vector<BeliefObs> obs;
    for (const PanelRecord& r : panel.rows)
        if (r.beliefMode >= 0) obs.push_back({r.age, r.beliefMode, r.trueSpa});
    return obs;
}

SummaryStats summarize(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("summarize: no observations");
    std::sort(values.begin(), values.end());
    const long n = static_cast<long>(values.size());

    SummaryStats st;
    st.n = n;
    for (size_t k = 0; k < kPercentilePoints.size(); ++k) {
        const long rank = n * kPercentilePoints[k]; // times 100
        if (rank % 100 == 0) {
            long i = rank / 100;
            double lo = values[static_cast<size_t>(std::clamp(i - 1, 0l, n - 1))];
            double hi = values[static_cast<size_t>(std::clamp(i, 0l, n - 1))];
            st.percentiles[k] = 0.5 * (lo + hi);
        } else {
            long i = rank / 100; // ceil(rank/100) - 1 for non-integer ranks
            st.percentiles[k] = values[static_cast<size_t>(std::clamp(i, 0l, n - 1))];
        }
    }

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    st.mean = mean;
    st.sd = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : nan;
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    st.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : nan;
    st.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : nan;
    return st;
}

SummaryStats summary_stats(const Panel& panel, const std::string& variable) {
    double PanelRecord::* field = nullptr;
    if (variable == "assets") field = &PanelRecord::assets;
    else if (variable == "consumption") field = &PanelRecord::consumption;
    else if (variable == "income_offer") field = &PanelRecord::incomeOffer;
    else if (variable == "aime") field = &PanelRecord::aime;
    else if (variable == "next_assets") field = &PanelRecord::nextAssets;
    else
        throw std::invalid_argument("summary_stats: unknown variable '" + variable +
                                    "'");
    std::vector<double> values;
    values.reserve(panel.rows.size());
    for (const PanelRecord& r : panel.rows) values.push_back(r.*field);
    if (values.empty())
        throw std::invalid_argument("summary_stats: empty panel");
    return summarize(std::move(values));
}

std::vector<AgeProfileRow> age_profiles(const Panel& panel) {
    std::map<int, AgeProfileRow> byAge;
    for (const PanelRecord& r : panel.rows) {
        AgeProfileRow& row = byAge[r.age];
        row.age = r.age;
        row.participationRate += r.worked ? 1.0 : 0.0;
        row.meanAssets += r.assets;
        ++row.n;
    }
    std::vector<AgeProfileRow> out;
    out.reserve(byAge.size());
    for (auto& [age, row] : byAge) {
        row.participationRate /= static_cast<double>(row.n);
        row.meanAssets /= static_cast<double>(row.n);
        out.push_back(row);
    }
    return out;
}

std::vector<ChoiceProbDiffRow> choice_prob_diff_map(const Solution& ri,
                                                    const Solution& re, int age) {
    const StateSpace& a = ri.ss;
    const StateSpace& b = re.ss;
    const bool same = a.nW() == b.nW() && a.nSlots() == b.nSlots() &&
                      a.params.ageStart == b.params.ageStart &&
                      a.params.ageDeath == b.params.ageDeath &&
                      a.assets.points == b.assets.points &&
                      a.aime.points == b.aime.points;
    if (!same)
        throw ConfigError("analyze.solutions",
                          "choice_prob_diff_map: solutions use different grids");
    if (age < a.params.ageStart || age >= a.params.ageDeath)
        throw std::invalid_argument("choice_prob_diff_map: no decisions at age " +
                                    std::to_string(age));

    std::vector<int> slots;
    for (int slot = 0; slot < a.nSlots(); ++slot)
        if (a.slot_valid(age, slot)) slots.push_back(slot);

    std::vector<ChoiceProbDiffRow> out;
    out.reserve(slots.size() * static_cast<size_t>(a.nW()));
    const int nD = a.nD();
    for (int w = 0; w < a.nW(); ++w) {
        DecisionValues dv = decision_values(ri, age, w);
        for (int slot : slots) {
            std::vector<double> cp = choice_probs(ri, age, slot, w, dv);
            double pWork = 0.0;
            for (int d = 1; d < nD; d += 2) pWork += cp[d];
            ChoiceProbDiffRow row;
            row.slot = slot;
            row.spa = slot == StateSpace::kReceiving ? -1 : a.spa_of_slot(slot);
            row.w = w;
            row.pWorkRi = pWork;
            row.workRe = re.policy(age, slot, w).work ? 1.0 : 0.0;
            row.diff = pWork - row.workRe;
            out.push_back(row);
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ChoiceProbDiffRow& x, const ChoiceProbDiffRow& y) {
                         return x.slot != y.slot ? x.slot < y.slot : x.w < y.w;
                     });
    return out;
}

} // namespace spalab
