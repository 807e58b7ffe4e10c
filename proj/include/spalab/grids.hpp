#pragma once
#include <vector>

namespace spalab {

// strictly increasing grid with curvature-controlled spacing
struct Grid {
    std::vector<double> points;

    int n() const { return static_cast<int>(points.size()); }
    double operator[](int i) const { return points[i]; }
    double min() const { return points.front(); }
    double max() const { return points.back(); }
};

// points[i] = min + (max - min) * (i/(n-1))^curvature; curvature > 1 packs
// points toward the lower end
Grid build_grid(int n, double min, double max, double curvature);

// largest index i with points[i] <= x (floor semantics, so a snapped asset
// choice is always affordable); throws std::domain_error for x < min
int snap_down(const Grid& g, double x);

// nearest grid index, ties toward the lower node; clamps outside the range
int snap_nearest(const Grid& g, double x);

// linear interpolation weight pair: value x maps to (i, w) with
// x ~ w*points[i] + (1-w)*points[i+1]; clamped at the ends
struct InterpWeight {
    int i;
    double w;
};
InterpWeight interp_weight(const Grid& g, double x);

// finite first-order Markov chain for the AR(1) income shock
struct MarkovChain {
    std::vector<double> nodes;
    std::vector<double> trans;   // row-major n x n, trans[i*n + j] = P(j | i)
    std::vector<double> initial; // first-period distribution over nodes

    int n() const { return static_cast<int>(nodes.size()); }
    double p(int i, int j) const { return trans[i * n() + j]; }
};

// Rouwenhorst discretization of eps' = rho*eps + e, e ~ N(0, sigmaEps^2).
// Matches conditional mean/persistence and the stationary variance
// sigmaEps^2/(1-rho^2) exactly. The initial distribution puts N(0, sigmaInit^2)
// mass on each node's midpoint cell.
MarkovChain discretize_ar1(double rho, double sigmaEps, double sigmaInit, int n);

} // namespace spalab
