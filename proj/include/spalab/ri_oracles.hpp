#pragma once
#include <string>

#include "spalab/ri_solver.hpp"

namespace spalab {

// Independent check route for the attention fixed point. The attention value
// equals the maximum over the decision simplex of the concave objective
//   G(q) = sum_s mu(s) * lambda * log sum_d q(d) exp(z(s,d)/lambda),
// so a direct search over q bounds the fixed point from both sides without
// touching the alternating iteration.
struct DualScanResult {
    double value = 0.0;
    std::vector<double> q;
};

// Maximizes G over the simplex: closed form for one decision, golden-section
// for two, dense grid with local zoom for three. Requires every z entry
// finite; refuses nD > 3 with std::invalid_argument.
DualScanResult attention_dual_scan(const std::vector<double>& z, int nS, int nD,
                                   const std::vector<double>& mu, double lambda);

// G(q) itself, for spot checks against candidate rules.
double attention_dual_objective(const std::vector<double>& z, int nS, int nD,
                                const std::vector<double>& mu, double lambda,
                                const std::vector<double>& q);

// Hand-sized attention problems with qualitatively different solutions,
// shared by the unit tests and the oracle-check command.
struct AttentionInstance {
    std::string name;
    int nS = 0;
    int nD = 0;
    std::vector<double> mu;
    std::vector<double> z;
    double lambda = 0.0;
};
std::vector<AttentionInstance> canned_attention_instances();

} // namespace spalab
