#pragma once
#include <iosfwd>
#include <string>
#include <vector>

namespace spalab {

// One verification check: solver output against an independent route. When
// wantAtMost is set the check passes iff residual <= tol, otherwise it is a
// must-exceed check (residual >= tol).
struct OracleCheck {
    std::string name;
    double residual = 0.0;
    double tol = 0.0;
    bool wantAtMost = true;
    bool pass = false;
};

// Runs the shipped verification suite: backward induction against full event
// tree enumeration on tiny instances, the attention fixed point against a
// direct search over the decision simplex, and the information/cost
// monotonicity ladder. tolOverride > 0 replaces every residual tolerance
// (a dev knob for exercising the failure path).
std::vector<OracleCheck> run_oracle_suite(double tolOverride = 0.0);

// Full command-line entry point; returns the process exit code.
// 0 success, 2 config error, 3 numeric failure, 4 missing or stale artifact.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace spalab
