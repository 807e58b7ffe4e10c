#pragma once
#include "spalab/re_solver.hpp"

namespace spalab {

// Alternating update for the static attention problem
//   max_p  sum_s mu(s) [ sum_d p(d|s) z(s,d) ] - lambda * I(s; d),
// where the decision maker pays lambda per nat of mutual information between
// the unknown state s and the decision d. The iteration alternates the Gibbs
// rule p(d|s) ~ q(d) exp(z(s,d)/lambda) with the marginal update
// q(d) = sum_s mu(s) p(d|s) until q stops moving.
struct BAOptions {
    double tol = 1e-10;   // sup-norm tolerance on the default-rule update
    int maxIters = 2000000; // budget of marginal updates; tiny-lambda problems
                            // converge slowly without the extrapolation cycles
};

struct BAResult {
    std::vector<double> p; // [s*nD + d] conditional choice probabilities
    std::vector<double> q; // [d] converged default rule (decision marginal)
    std::vector<double> v; // [s] certainty-equivalent value of state s
    double info = 0.0;     // nats of information the rule carries about s
    double residual = 0.0; // last sup-norm change of q
    int iters = 0;
    bool converged = false;
};

// z is row-major [nS x nD]; -inf marks infeasible decisions and the feasible
// set must be identical across rows. mu must be strictly positive and sum to
// one. lambda must be > 0. warmStart, when given, seeds the default rule as
// an even blend of the supplied q and the uniform rule, so a stale guess can
// never pin a decision's probability at zero. The marginal update runs in
// three-step cycles: two plain updates followed by a vector-extrapolated
// trial point that is kept only when its own update moves less than the plain
// one did, so the iterate sequence stays a deterministic function of the
// inputs and the fixed point is unchanged. Throws std::invalid_argument on
// malformed input; a result with converged == false is returned, not thrown,
// when the iteration cap is hit.
BAResult ba_fixed_point(const std::vector<double>& z, int nS, int nD,
                        const std::vector<double>& mu, double lambda,
                        const BAOptions& opts = {},
                        const std::vector<double>* warmStart = nullptr);

// I(s; d) = sum_s mu(s) sum_d p(d|s) log(p(d|s) / q(d)) in nats, with
// 0 log 0 = 0. Returns +inf if p puts mass where q has none.
double mutual_information(const std::vector<double>& p, const std::vector<double>& q,
                          const std::vector<double>& mu, int nS, int nD);

// Prior over the pending-SPA slots at this age for someone not yet receiving,
// aligned with the valid not-receiving slots in ascending SPA order. Empty
// when no pending slot exists or the no-receipt event has probability zero
// (then every pending slot is a measure-zero state).
std::vector<double> pending_spa_weights(const StateSpace& ss, int age);

// Backward induction where the pending SPA must be attended to at a cost:
// at every age with at least two positive-prior pending slots, each W point
// solves the attention problem across those slots; the receiving slot,
// measure-zero slots and single-slot supports are solved by hard max, which
// makes the solution collapse to solve_re exactly when the SPA never moves.
// Throws std::invalid_argument when lambda <= 0 and ConvergenceError when a
// fixed point's residual is still above 1e4 x tol at the iteration cap;
// smaller misses are recorded in the slab diagnostics instead.
SolutionRI solve_ri(const StateSpace& ss, const SolveOptions& opts = {},
                    const BAOptions& baOpts = {});

// Decision values at (age, w) reassembled from the stored continuation
// tables; bit-identical to what the solver saw. zR is empty when receipt is
// impossible at this age; zNS rows align with nsSlots.
struct DecisionValues {
    std::vector<double> zR;
    std::vector<double> zNS;
    std::vector<int> nsSlots;
};
DecisionValues decision_values(const Solution& sol, int age, int w);

// Conditional choice probabilities at (age, slot, w), reconstructed from the
// stored default rule and continuation tables; a point mass at the stored
// policy wherever the cell was solved by hard max. For attention cells this
// reproduces the fixed point's conditional rule bit for bit.
std::vector<double> choice_probs(const Solution& sol, int age, int slot, int w);

// Same, reusing a decision-value bundle already computed for this (age, w);
// callers that need several slots at one state point avoid reassembling z.
std::vector<double> choice_probs(const Solution& sol, int age, int slot, int w,
                                 const DecisionValues& dv);

} // namespace spalab
