#pragma once
#include <map>
#include <vector>

#include "spalab/model.hpp"
#include "spalab/ri_solver.hpp"

namespace spalab {

// Outside-observer posterior over a household's pension age. Either the
// pension is in payment (SPA known exactly) or it is still pending and the
// belief is a distribution over the ages it could still turn out to be.
// Running the filter under the household's own stochastic process keeps the
// pending support strictly above the current age with total mass 1.
struct Belief {
    bool receiving = false;
    int spa = 0;  // meaningful when receiving
    SpaDist dist; // meaningful when pending

    int mode() const { return receiving ? spa : dist.mode(); }
    double at(int s) const {
        if (receiving) return s == spa ? 1.0 : 0.0;
        return dist.at(s);
    }
    double mode_prob() const { return receiving ? 1.0 : dist.at(dist.mode()); }
};

// Belief held on entering the first model age without the pension in payment:
// the conditional law of the SPA given no receipt so far.
Belief initial_belief(const ModelParams& p);

// One filtering step. The observer sees the decision taken at `age` in
// costless state `w`, weighs each pending SPA by the solved rule's probability
// of that decision, pushes the posterior one step through the SPA walk, and
// finally conditions on whether the pension entered payment at age+1 (receipt
// reveals the SPA exactly; its absence removes the mass at age+1).
// Throws std::logic_error when the observation has probability zero under the
// belief: an impossible action, receipt the belief ruled out, or no pending
// mass left. A receiving belief is frozen and only checks consistency.
Belief update_belief(const Belief& b, const Solution& rule, int age, int w,
                     int dObserved, bool receiptAtNextAge);

// One survey-style observation: the posterior mode recorded at `age` against
// the SPA that household actually faced.
struct BeliefObs {
    int age = 0;
    int beliefMode = 0;
    int trueSpa = 0;
};

// Mistaken-belief summary: integer histogram of (mode - true SPA) in years,
// with exact and within-one-year shares, pooled and at age 58. The age-58
// shares are NaN when no observation has that age.
struct BeliefErrorStats {
    std::map<int, long> histogram;
    long n = 0;
    long nAt58 = 0;
    double shareExact = 0.0;
    double shareWithin1 = 0.0;
    double shareExactAt58 = 0.0;
    double shareWithin1At58 = 0.0;
};

BeliefErrorStats belief_error_stats(const std::vector<BeliefObs>& obs);

} // namespace spalab
