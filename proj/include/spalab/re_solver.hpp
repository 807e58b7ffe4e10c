#pragma once
#include "spalab/state_space.hpp"

namespace spalab {

struct SolveOptions {
    int workers = 0;      // OpenMP thread count, 0 = runtime default
    bool parallel = true; // false = serial reference sweep
};

// Decisions with positive consumption at (age, W, receipt status), in
// tie-break order (lower savings first, leisure before work). Feasibility
// never depends on the SPA value itself, only on whether the pension is
// already in payment.
std::vector<Decision> feasible_choices(const StateSpace& ss, int age,
                                       const StateSpace::WState& st, bool receiving);

// Backward induction under costless observation of the SPA: every valid
// (age, slot, W) cell gets its hard-max value and policy. The parallel and
// serial sweeps write bit-identical slabs for any worker count.
SolutionRE solve_re(const StateSpace& ss, const SolveOptions& opts = {});

// Starting state for the enumeration oracle. The career-average index m picks
// the exact starting value aime = ss.aime[m]; the recursion then tracks the
// career average off-grid, so instances meant to reproduce solve_re must keep
// it frozen (aimeFreezeAge <= ageStart).
struct BruteForceStart {
    int age = 0;
    int type = 0;
    int a = 0;
    int y = 0;
    int m = 0;
    int u = 0;
    int spa = 0;
    bool receiving = false;
};

// Expected discounted value by direct recursion over the full event tree,
// written against the model primitives only (no continuation tables, no
// shared kernel). Each visited tree node counts against maxNodes; larger
// instances are refused with std::invalid_argument.
double brute_force_value(const StateSpace& ss, const BruteForceStart& s0,
                         long maxNodes = 1'000'000);

} // namespace spalab
