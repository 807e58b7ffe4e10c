// Timing harness: the OpenMP sweeps against the serial reference, with a
// bitwise comparison of the slabs they produce.
#include <CLI11.hpp>
#include <chrono>
#include <cstring>
#include <iostream>
#include <string>

#include "spalab/re_solver.hpp"
#include "spalab/ri_solver.hpp"

using namespace spalab;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    return dt.count();
}

template <class T>
bool same_bits(const std::vector<T>& x, const std::vector<T>& y) {
    return x.size() == y.size() &&
           (x.empty() || std::memcmp(x.data(), y.data(), x.size() * sizeof(T)) == 0);
}

bool identical(const Solution& a, const Solution& b) {
    if (a.ages.size() != b.ages.size()) return false;
    for (size_t i = 0; i < a.ages.size(); ++i) {
        const Solution::AgeSlab& s = a.ages[i];
        const Solution::AgeSlab& t = b.ages[i];
        if (!same_bits(s.value, t.value) || !same_bits(s.aPol, t.aPol) ||
            !same_bits(s.lPol, t.lPol) || !same_bits(s.defaultRule, t.defaultRule) ||
            !same_bits(s.infoFlow, t.infoFlow))
            return false;
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel timing: serial reference vs OpenMP sweep"};
    int nAssets = 30;
    int nIncome = 5;
    double lambda = 0.001;
    int workers = 0;
    bool skipRi = false;
    app.add_option("--n-assets", nAssets, "asset grid points");
    app.add_option("--n-income", nIncome, "income grid points");
    app.add_option("--lambda", lambda, "information cost for the attention solve");
    app.add_option("--workers", workers, "OpenMP threads, 0 = runtime default");
    app.add_flag("--skip-ri", skipRi, "time the costless-observation solve only");
    CLI11_PARSE(app, argc, argv);

    ModelParams params = default_params();
    params.lambda = lambda;
    GridSpec gs;
    gs.nAssets = nAssets;
    gs.nIncome = nIncome;
    StateSpace ss = make_state_space(params, gs);
    std::cout << "[bench] ages " << params.ageStart << ".." << params.ageDeath
              << ", " << ss.nW() << " W-points, " << ss.nSlots() << " slots, "
              << ss.nD() << " decisions\n";

    SolveOptions serial{0, false};
    SolveOptions parallel{workers, true};

    auto t0 = std::chrono::steady_clock::now();
    SolutionRE reSerial = solve_re(ss, serial);
    double tSer = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    SolutionRE rePar = solve_re(ss, parallel);
    double tPar = seconds_since(t0);
    std::cout << "[bench] solve-re serial   " << tSer << " s\n"
              << "[bench] solve-re parallel " << tPar << " s (speedup "
              << tSer / tPar << "x, bit-identical "
              << (identical(reSerial, rePar) ? "yes" : "NO") << ")\n";

    if (!skipRi) {
        t0 = std::chrono::steady_clock::now();
        SolutionRI riSerial = solve_ri(ss, serial);
        double uSer = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        SolutionRI riPar = solve_ri(ss, parallel);
        double uPar = seconds_since(t0);
        std::cout << "[bench] solve-ri serial   " << uSer << " s\n"
                  << "[bench] solve-ri parallel " << uPar << " s (speedup "
                  << uSer / uPar << "x, bit-identical "
                  << (identical(riSerial, riPar) ? "yes" : "NO") << ")\n";
    }
    return 0;
}
