#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "trcl/curvature.hpp"
#include "trcl/models.hpp"

namespace trcl {

enum class FisherMode { Full, Diagonal, RankOne };

std::string to_string(FisherMode m);
FisherMode parse_fisher_mode(const std::string& name);

struct FisherEstimate {
    Curvature curvature;
    /// RankOne only: the mean gradient vanished and the result is RankOne(0, e1).
    bool degenerate = false;
    /// Mean pairwise cosine between per-sample gradients (over at most
    /// kCollinearitySampleCap samples).
    double collinearity = 0.0;
    std::size_t n_samples = 0;
};

inline constexpr std::size_t kCollinearitySampleCap = 128;
inline constexpr double kDegenerateMeanGradNorm = 1e-12;

/// Builds the requested representation from per-sample gradients g_i:
/// Full (1/N) sum g g^T, Diagonal its diagonal, RankOne with u = mean(g)/||mean(g)||
/// and rho = (1/N) sum (g.u)^2. Summation runs in sample order.
FisherEstimate fisher_from_gradients(std::span<const Vector> grads, FisherMode mode);

/// Empirical Fisher from data gradients at `params`.
FisherEstimate empirical_fisher(const ModelSpec& spec, const Params& params, std::span<const Sample> data,
                                FisherMode mode, std::uint64_t rng_seed);

double mean_pairwise_cosine(std::span<const Vector> vectors);

/// Families with exact sampling from p_theta and closed-form per-sample NLL Hessian.
struct ExpFamily {
    enum class Kind { GaussianMean, Categorical };
    Kind kind = Kind::GaussianMean;
    /// Gaussian dimension, or number of classes (2..4) for Categorical.
    std::size_t dim = 1;

    static ExpFamily gaussian_mean(std::size_t d) { return {Kind::GaussianMean, d}; }
    static ExpFamily categorical(std::size_t classes) { return {Kind::Categorical, classes}; }
};

struct FisherHessianReport {
    double frobenius_rel_err = 0.0;
    std::size_t n = 0;
    /// Monte Carlo E[g g^T] under x ~ p_theta.
    Matrix fisher;
    /// Monte Carlo E[Hessian of the per-sample NLL] under the same draws.
    Matrix expected_hessian;
};

/// ||E[g g^T] - E[H]||_F / ||E[g g^T]||_F with x drawn from the model itself.
FisherHessianReport fisher_hessian_check(const ExpFamily& family, const Params& params,
                                         std::size_t n_model_samples, std::uint64_t rng_seed);

Vector softmax(const Vector& logits);

}  // namespace trcl
