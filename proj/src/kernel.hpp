#pragma once
// Internal decision-evaluation kernel shared by the RE solver, the RI solver
// and the simulation-side choice-probability reconstruction. Everything here
// must stay deterministic: the same (age, W) always produces bit-identical
// z values, which is what lets choice probabilities be recomputed on demand
// instead of stored.

#include <omp.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <vector>

#include "spalab/state_space.hpp"

namespace spalab::detail {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// per-age precomputed inputs for evaluating decisions at that age
struct AgeContext {
    const StateSpace* ss = nullptr;
    int age = 0;
    double survival = 1.0;
    const std::vector<double>* ec = nullptr; // expected continuation, empty/null at terminal age
    std::vector<double> offers;              // [type*nY + y] income offers at this age
    std::vector<double> bequestByA;          // bequest_utility(assets[a])
    std::vector<int> nsSlots;                // valid not-receiving slots, ascending SPA
    bool receivingValid = false;
};

AgeContext make_age_context(const StateSpace& ss, int age, const std::vector<double>* ec);

// ec[(slot, type, y, a', m')] = E[V_{age+1} | this period's income state y,
// savings a', career average node m', SPA slot], expectation over income and
// unemployment. Invalid slots are left NaN and are never referenced.
void build_ec(const StateSpace& ss, int ageNext, const std::vector<double>& valueNext,
              std::vector<double>& ec);

// z matrices for one W point. Layout:
//   zR[d]          value of decision d in the receiving slot
//   zNS[k*nD + d]  value of decision d when SPA = cx.nsSlots[k]'s SPA
// Infeasible decisions carry -inf. The not-receiving feasibility mask is the
// same for every slot: the budget cannot depend on an SPA that has not been
// reached, which is what the attention fixed point relies on.
struct WScratch {
    std::vector<double> zR;
    std::vector<double> zNS;
    std::vector<double> contBuf; // per-slot continuation scratch, indexed by slot
};

void assemble_w(const AgeContext& cx, int w, WScratch& sc);

struct MaxResult {
    double value;
    int argmax;
};

// Runs cell(w, scratch) for w = 0..nW-1, serial or OpenMP-parallel. Each cell
// writes only its own output slots, so the result is bit-identical for any
// worker count. The first exception wins and is rethrown once the sweep
// drains.
template <class Fn>
void sweep_w(int nW, bool parallel, int workers, Fn&& cell) {
    if (!parallel) {
        WScratch sc;
        for (int w = 0; w < nW; ++w) cell(w, sc);
        return;
    }
    const int nt = workers > 0 ? workers : omp_get_max_threads();
    std::atomic<bool> failed{false};
    std::exception_ptr eptr = nullptr;
#pragma omp parallel num_threads(nt)
    {
        WScratch sc;
#pragma omp for schedule(static)
        for (int w = 0; w < nW; ++w) {
            if (failed.load(std::memory_order_relaxed)) continue;
            try {
                cell(w, sc);
            } catch (...) {
                if (!failed.exchange(true)) {
#pragma omp critical(spalab_sweep_err)
                    eptr = std::current_exception();
                }
            }
        }
    }
    if (eptr) std::rethrow_exception(eptr);
}

// hard max over one z column; enumeration order is the tie-break order, so
// requiring a strict improvement implements "lower savings, then leisure"
inline MaxResult hard_max(const double* z, int nD) {
    MaxResult r{kNegInf, -1};
    for (int d = 0; d < nD; ++d)
        if (z[d] > r.value) { r.value = z[d]; r.argmax = d; }
    return r;
}

// NaN/sentinel-initialized value and policy arrays for one age
void init_age_slab(const StateSpace& ss, Solution::AgeSlab& slab);

// terminal-age values: assets brought in are left as the bequest
void fill_terminal_slab(const StateSpace& ss, Solution::AgeSlab& slab);

// hard max of one z column written into (slot, w); throws std::domain_error
// when nothing is affordable
void store_hard_max(const StateSpace& ss, Solution::AgeSlab& slab, int age, int slot,
                    int w, const double* z);

} // namespace spalab::detail
