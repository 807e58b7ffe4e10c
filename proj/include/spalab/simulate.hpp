#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spalab/beliefs.hpp"
#include "spalab/re_solver.hpp"

namespace spalab {

// One cohort: a label and the realized SPA path its households face, indexed
// by age - ageStart; a shorter path is extended by its last value. Paths must
// be non-decreasing in unit steps within [spaInit, spaCap], and the value in
// force freezes once the pension enters payment.
struct CohortPath {
    std::string label;
    std::vector<int> spaByAge;
};

// constant-SPA cohorts (the shipped reform experiment), labeled "spa<value>"
std::vector<CohortPath> constant_cohorts(const std::vector<int>& spas);

struct ScenarioSpec {
    enum class SpaMode { Paths, Process };

    SolveKind kind = SolveKind::RE;
    SpaMode spaMode = SpaMode::Paths; // Process draws each household's SPA
                                      // path from the model's own walk
    std::vector<CohortPath> cohorts = constant_cohorts({60, 61, 62});
    int householdsPerCohort = 500;
    int ageEnd = 75;        // last recorded age
    bool mortality = false; // death shocks inside the panel window
    std::uint64_t seed = 1;
    double initAssetsLogMean = 10.309; // lognormal entering assets, snapped down
    double initAssetsLogSd = 1.0;
    double initAimeFactor = 0.9; // entering career average over the first offer
};

// One household-age observation. assets/aime are entering stocks; the budget
// identity consumption + nextAssets == cash_on_hand(entering fields) holds
// exactly. Belief fields are tracked on RI panels only (-1 / 0 otherwise).
struct PanelRecord {
    int householdId = 0;
    int cohort = 0;
    int age = 0;
    int typeId = 0;
    double assets = 0.0;
    double incomeOffer = 0.0;
    bool unemployed = false;
    bool worked = false;
    double consumption = 0.0;
    double aime = 0.0;
    double nextAssets = 0.0;
    bool receiving = false;
    int trueSpa = 0;
    int beliefMode = -1;
    double beliefModeProb = 0.0;

    bool operator==(const PanelRecord&) const = default;
};

struct Panel {
    std::vector<PanelRecord> rows; // ordered by (cohort, householdId, age)
    std::vector<std::string> cohortLabels;
    std::uint64_t seed = 0;
    SolveKind kind = SolveKind::RE;
    int householdsPerCohort = 0;
};

// Simulates one household panel from a solved model. Households draw type,
// entering assets/income/unemployment, then live out the scenario: RE panels
// follow the stored policy, RI panels draw each decision from the solved
// choice rule (two RNG streams per household, so RE and RI panels under one
// seed share identical exogenous shock paths). Bit-identical output for any
// worker count. Throws ConfigError on scenario/solution mismatches.
Panel simulate_panel(const Solution& sol, const ScenarioSpec& sc,
                     const SolveOptions& run = {});

// survey-style belief observations (RI panels; empty for RE panels)
std::vector<BeliefObs> panel_belief_obs(const Panel& panel);

inline constexpr std::array<int, 9> kPercentilePoints = {1, 5, 10, 25, 50, 75, 90, 95, 99};

// Distribution summary in the reporting convention of survey tables:
// percentile p at rank n*p/100 (midpoint of adjacent order statistics when
// that rank is an integer), sd with the n-1 divisor, skewness m3/m2^1.5 and
// kurtosis m4/m2^2 from central moments; degenerate samples report NaN.
struct SummaryStats {
    long n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    std::array<double, 9> percentiles{};
};

SummaryStats summarize(std::vector<double> values); // throws on empty input

// variable: assets | consumption | income_offer | aime | next_assets
SummaryStats summary_stats(const Panel& panel, const std::string& variable);

struct AgeProfileRow {
    int age = 0;
    double participationRate = 0.0;
    double meanAssets = 0.0;
    long n = 0;
};

std::vector<AgeProfileRow> age_profiles(const Panel& panel);

// Per-state gap between the attention rule's work probability and the
// costless-observation work indicator at one age; spa is -1 on the receiving
// slot. Throws ConfigError when the two solutions live on different grids.
struct ChoiceProbDiffRow {
    int slot = 0;
    int spa = 0;
    int w = 0;
    double pWorkRi = 0.0;
    double workRe = 0.0;
    double diff = 0.0;
};

std::vector<ChoiceProbDiffRow> choice_prob_diff_map(const Solution& ri,
                                                    const Solution& re, int age);

} // namespace spalab
