#pragma once
#include <string>
#include <utility>
#include <vector>

#include "spalab/beliefs.hpp"
#include "spalab/econometrics.hpp"
#include "spalab/simulate.hpp"
#include "spalab/state_space.hpp"

namespace spalab {

// shortest decimal string that round-trips to the same double
std::string format_double(double x);

// Panel artifact. Metadata lines ("# key = value": seed, kind,
// households_per_cohort, cohort_labels) precede the header so the analyze
// stage can rebuild the Panel exactly; doubles round-trip bit for bit.
void write_panel_csv(const std::string& path, const Panel& panel);
Panel read_panel_csv(const std::string& path); // ArtifactError when missing/malformed

void write_age_profiles_csv(const std::string& path,
                            const std::vector<AgeProfileRow>& rows);
void write_summary_csv(const std::string& path,
                       const std::vector<std::pair<std::string, SummaryStats>>& rows);
void write_treatment_csv(const std::string& path,
                         const std::vector<TreatmentCell>& cells);
void write_belief_stats_csv(const std::string& path, const BeliefErrorStats& st);
void write_belief_histogram_csv(const std::string& path, const BeliefErrorStats& st);
void write_choice_diff_csv(const std::string& path,
                           const std::vector<ChoiceProbDiffRow>& rows);

// Solution exports over the valid (age, slot) cells.
void write_value_csv(const std::string& path, const Solution& sol);
void write_policy_csv(const std::string& path, const Solution& sol);
// attention diagnostics per (age, w) where the fixed point ran
void write_info_flow_csv(const std::string& path, const Solution& sol);

} // namespace spalab
