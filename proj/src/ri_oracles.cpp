#include "spalab/ri_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spalab {

namespace {

void validate_scan_input(const std::vector<double>& z, int nS, int nD,
                         const std::vector<double>& mu, double lambda) {
    if (nS < 1 || nD < 1) throw std::invalid_argument("attention_dual_scan: empty problem");
    if (z.size() != static_cast<size_t>(nS) * nD)
        throw std::invalid_argument("attention_dual_scan: z size mismatch");
    if (mu.size() != static_cast<size_t>(nS))
        throw std::invalid_argument("attention_dual_scan: mu size mismatch");
    if (!(lambda > 0.0))
        throw std::invalid_argument("attention_dual_scan: lambda must be > 0");
    for (double v : z)
        if (!std::isfinite(v))
            throw std::invalid_argument("attention_dual_scan: z must be finite");
    double sum = 0.0;
    for (double m : mu) {
        if (!(m > 0.0))
            throw std::invalid_argument("attention_dual_scan: mu must be strictly positive");
        sum += m;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("attention_dual_scan: mu must sum to 1");
}

double eval_dual(const std::vector<double>& z, int nS, int nD,
                 const std::vector<double>& mu, double lambda, const double* q) {
    double total = 0.0;
    for (int s = 0; s < nS; ++s) {
        const double* zrow = z.data() + static_cast<size_t>(s) * nD;
        double m = zrow[0];
        for (int d = 1; d < nD; ++d) m = std::max(m, zrow[d]);
        double dn = 0.0;
        for (int d = 0; d < nD; ++d) dn += q[d] * std::exp((zrow[d] - m) / lambda);
        total += mu[s] * (m + lambda * std::log(dn));
    }
    return total;
}

} // namespace

double attention_dual_objective(const std::vector<double>& z, int nS, int nD,
                                const std::vector<double>& mu, double lambda,
                                const std::vector<double>& q) {
    validate_scan_input(z, nS, nD, mu, lambda);
    if (q.size() != static_cast<size_t>(nD))
        throw std::invalid_argument("attention_dual_objective: q size mismatch");
    return eval_dual(z, nS, nD, mu, lambda, q.data());
}

DualScanResult attention_dual_scan(const std::vector<double>& z, int nS, int nD,
                                   const std::vector<double>& mu, double lambda) {
    validate_scan_input(z, nS, nD, mu, lambda);
    DualScanResult r;

    if (nD == 1) {
        r.q = {1.0};
        r.value = eval_dual(z, nS, nD, mu, lambda, r.q.data());
        return r;
    }

    if (nD == 2) {
        // golden-section over q = (x, 1-x); G is concave in x
        auto f = [&](double x) {
            double q[2] = {x, 1.0 - x};
            return eval_dual(z, nS, nD, mu, lambda, q);
        };
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = 0.0, hi = 1.0;
        double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        double f1 = f(x1), f2 = f(x2);
        for (int it = 0; it < 200; ++it) {
            if (f1 >= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = f(x2);
            }
        }
        double x = 0.5 * (lo + hi);
        r.q = {x, 1.0 - x};
        r.value = f(x);
        return r;
    }

    if (nD == 3) {
        // dense barycentric grid, then three zoom rounds around the best point
        auto f = [&](double x, double y) {
            double q[3] = {x, y, 1.0 - x - y};
            return eval_dual(z, nS, nD, mu, lambda, q);
        };
        double bx = 1.0 / 3.0, by = 1.0 / 3.0, bv = f(bx, by);
        double step = 1.0 / 200.0;
        for (int i = 0; i <= 200; ++i)
            for (int j = 0; j + i <= 200; ++j) {
                double v = f(i * step, j * step);
                if (v > bv) { bv = v; bx = i * step; by = j * step; }
            }
        for (int round = 0; round < 3; ++round) {
            double window = 2.0 * step;
            step /= 20.0;
            double cx = bx, cy = by;
            for (double x = std::max(0.0, cx - window); x <= std::min(1.0, cx + window);
                 x += step)
                for (double y = std::max(0.0, cy - window);
                     y <= std::min(1.0 - x, cy + window); y += step) {
                    double v = f(x, y);
                    if (v > bv) { bv = v; bx = x; by = y; }
                }
        }
        r.q = {bx, by, 1.0 - bx - by};
        r.value = bv;
        return r;
    }

    throw std::invalid_argument("attention_dual_scan: supports at most 3 decisions");
}

std::vector<AttentionInstance> canned_attention_instances() {
    std::vector<AttentionInstance> out;
    auto add = [&](std::string name, int nS, int nD, std::vector<double> mu,
                   std::vector<double> z, double lambda) {
        out.push_back({std::move(name), nS, nD, std::move(mu), std::move(z), lambda});
    };
    add("symmetric-2x2", 2, 2, {0.5, 0.5}, {1.0, 0.0, 0.0, 1.0}, 0.5);
    add("skewed-prior", 2, 2, {0.8, 0.2}, {1.0, 0.0, 0.0, 1.0}, 0.3);
    add("safe-middle-option", 2, 3, {0.5, 0.5}, {1.0, 0.6, 0.0, 0.0, 0.6, 1.0}, 0.4);
    add("cheap-information", 2, 2, {0.5, 0.5}, {1.0, 0.0, 0.0, 1.0}, 0.01);
    add("expensive-information", 2, 2, {0.5, 0.5}, {1.0, 0.0, 0.0, 1.0}, 50.0);
    add("three-states-two-choices", 3, 2, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
        {1.0, 0.0, 0.5, 0.5, 0.0, 1.0}, 0.25);
    add("asymmetric-payoffs", 2, 2, {0.4, 0.6}, {2.0, 0.0, 0.0, 0.5}, 0.35);
    return out;
}

} // namespace spalab
