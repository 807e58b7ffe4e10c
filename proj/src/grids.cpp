#include "spalab/grids.hpp"

#include <cmath>
#include <stdexcept>

namespace spalab {

Grid build_grid(int n, double min, double max, double curvature) {
    if (n < 2) throw std::invalid_argument("build_grid: n must be >= 2");
    if (!(max > min)) throw std::invalid_argument("build_grid: max must be > min");
    if (!(curvature > 0.0)) throw std::invalid_argument("build_grid: curvature must be > 0");
    Grid g;
    g.points.resize(n);
    for (int i = 0; i < n; ++i) {
        double frac = static_cast<double>(i) / (n - 1);
        g.points[i] = min + (max - min) * std::pow(frac, curvature);
    }
    g.points.front() = min;
    g.points.back() = max;
    return g;
}

int snap_down(const Grid& g, double x) {
    if (x < g.min()) throw std::domain_error("snap_down: x below grid minimum");
    int lo = 0, hi = g.n() - 1;
    while (lo < hi) {
        int mid = (lo + hi + 1) / 2;
        if (g.points[mid] <= x) lo = mid; else hi = mid - 1;
    }
    return lo;
}

int snap_nearest(const Grid& g, double x) {
    if (x <= g.min()) return 0;
    if (x >= g.max()) return g.n() - 1;
    int i = snap_down(g, x);
    if (i + 1 >= g.n()) return i;
    double dLo = x - g.points[i];
    double dHi = g.points[i + 1] - x;
    return (dHi < dLo) ? i + 1 : i;
}

InterpWeight interp_weight(const Grid& g, double x) {
    if (g.n() == 1 || x <= g.min()) return {0, 1.0};
    if (x >= g.max()) return {g.n() - 2, 0.0};
    int i = snap_down(g, x);
    if (i >= g.n() - 1) i = g.n() - 2;
    double w = (g.points[i + 1] - x) / (g.points[i + 1] - g.points[i]);
    return {i, w};
}

static double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

MarkovChain discretize_ar1(double rho, double sigmaEps, double sigmaInit, int n) {
    if (n < 1) throw std::invalid_argument("discretize_ar1: n must be >= 1");
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("discretize_ar1: rho must be in [0,1)");
    if (sigmaEps < 0.0) throw std::invalid_argument("discretize_ar1: sigmaEps must be >= 0");
    if (sigmaInit < 0.0) throw std::invalid_argument("discretize_ar1: sigmaInit must be >= 0");

    MarkovChain mc;
    if (n == 1) {
        mc.nodes = {0.0};
        mc.trans = {1.0};
        mc.initial = {1.0};
        return mc;
    }

    // Rouwenhorst recursion: start from the 2-state chain and grow one state
    // at a time, padding with zeros and averaging the interior rows
    double q = (1.0 + rho) / 2.0;
    std::vector<double> P = {q, 1.0 - q, 1.0 - q, q};
    for (int m = 3; m <= n; ++m) {
        std::vector<double> Pn(m * m, 0.0);
        auto prev = [&](int i, int j) { return P[i * (m - 1) + j]; };
        for (int i = 0; i < m - 1; ++i)
            for (int j = 0; j < m - 1; ++j) {
                double v = prev(i, j);
                Pn[i * m + j] += q * v;
                Pn[i * m + j + 1] += (1.0 - q) * v;
                Pn[(i + 1) * m + j] += (1.0 - q) * v;
                Pn[(i + 1) * m + j + 1] += q * v;
            }
        for (int i = 1; i < m - 1; ++i)
            for (int j = 0; j < m; ++j) Pn[i * m + j] /= 2.0;
        P = std::move(Pn);
    }
    mc.trans = std::move(P);

    double stationarySd = (rho > 0.0 || sigmaEps > 0.0)
                              ? sigmaEps / std::sqrt(1.0 - rho * rho)
                              : 0.0;
    double psi = stationarySd * std::sqrt(static_cast<double>(n - 1));
    mc.nodes.resize(n);
    for (int i = 0; i < n; ++i)
        mc.nodes[i] = -psi + 2.0 * psi * i / (n - 1);

    // first-period mass from the N(0, sigmaInit^2) cdf over midpoint cells
    mc.initial.assign(n, 0.0);
    if (sigmaInit == 0.0 || psi == 0.0) {
        // all mass on the node closest to zero (n odd: exactly the middle)
        int mid = 0;
        double best = std::abs(mc.nodes[0]);
        for (int i = 1; i < n; ++i)
            if (std::abs(mc.nodes[i]) < best) { best = std::abs(mc.nodes[i]); mid = i; }
        mc.initial[mid] = 1.0;
    } else {
        double prevCdf = 0.0;
        for (int i = 0; i < n; ++i) {
            double upper = (i == n - 1) ? 1.0
                         : norm_cdf((mc.nodes[i] + mc.nodes[i + 1]) / 2.0 / sigmaInit);
            mc.initial[i] = upper - prevCdf;
            prevCdf = upper;
        }
    }
    return mc;
}

} // namespace spalab
