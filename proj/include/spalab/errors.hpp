#pragma once
#include <stdexcept>
#include <string>
#include <vector>

namespace spalab {

// Config parsing/validation problems. CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
    std::string keyPath;
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what),
          keyPath(std::move(key)) {}
};

// Iterative routine failed to reach tolerance. CLI maps these to exit code 3.
struct ConvergenceError : std::runtime_error {
    double residual;
    int iterations;
    ConvergenceError(const std::string& what, double res, int iters)
        : std::runtime_error(what + " (residual " + std::to_string(res) +
                             " after " + std::to_string(iters) + " iterations)"),
          residual(res), iterations(iters) {}
};

// Design matrix lost full column rank. CLI maps these to exit code 3.
struct RankError : std::runtime_error {
    std::vector<std::string> columns; // offending columns, per QR pivoting
    RankError(const std::string& what, std::vector<std::string> cols)
        : std::runtime_error(what), columns(std::move(cols)) {}
};

// A required input artifact is missing or stale. CLI maps these to exit code 4.
struct ArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace spalab
