#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trcl/models.hpp"

namespace trcl {

enum class VerifySuite { All, FisherIdentity, RankOneSquare, GradCheck, TaylorLocality, QuadEquivalence };

std::string to_string(VerifySuite s);
VerifySuite parse_verify_suite(const std::string& name);

struct CheckResult {
    std::string suite;
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool passed = false;
    /// Informational checks are reported but never fail the suite.
    bool informational = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    [[nodiscard]] bool passed() const;
    [[nodiscard]] std::string to_text() const;
};

/// Runs the selected oracle suites. Deterministic in `seed`.
VerifyReport run_verify(VerifySuite suite, std::uint64_t seed);

/// Largest ||grad - central FD of loss|| / max(||grad||, ||FD||) over
/// `points` random (params, batch) pairs, with step `h`.
double grad_check_max_rel_err(const ModelSpec& spec, int points, std::uint64_t seed, double h = 1e-5);

/// Random batch suitable for `spec` (targets attached for Mlp).
Batch random_batch(const ModelSpec& spec, std::size_t n, std::uint64_t seed);

struct TaylorLocalityResult {
    double mean_ratio = 0.0;
    std::vector<double> ratios;
};

/// Teacher-student Mlp task whose optimum has exactly zero gradient; reports
/// r(delta) / r(delta/2) with r(delta) = ||grad L(theta* + delta) - H(theta*) delta||
/// over `directions` random directions of norm `delta_norm`.
TaylorLocalityResult taylor_locality(std::uint64_t seed, int directions = 10, double delta_norm = 0.1);

}  // namespace trcl
