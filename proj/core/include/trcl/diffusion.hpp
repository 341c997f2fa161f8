#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "trcl/models.hpp"

namespace trcl {

/// Timestep and noise used for one sample of the noise-prediction loss.
struct DiffusionDraw {
    int t = 1;
    Vector eps;
};

/// Deterministic in (rng_seed, sample_index): t uniform on 1..steps, eps ~ N(0, I).
DiffusionDraw diffusion_draw(std::uint64_t rng_seed, std::size_t sample_index, std::size_t dim,
                             int steps);

/// sqrt(alpha_bar) x0 + sqrt(1 - alpha_bar) eps, for alpha_bar in [0, 1].
Vector forward_marginal(const Vector& x0, double alpha_bar, const Vector& eps);

/// Closed-form q(x_t | x0) sample for 1 <= t <= schedule.steps.
Vector diffusion_forward(const Vector& x0, int t, const Vector& eps, const NoiseSchedule& schedule);

/// Sinusoidal embedding of t / steps.
Vector timestep_features(int t, int steps);

/// Predicts eps from (x_t, t).
using NoisePredictor = std::function<Vector(const Vector& x_t, int t)>;

/// Mean over the batch of ||eps - predictor(x_t, t)||^2 with draws from
/// diffusion_draw(rng_seed, i, ...).
double noise_prediction_loss(const NoiseSchedule& schedule, std::span<const Sample> batch,
                             std::uint64_t rng_seed, const NoisePredictor& predictor);

/// Ancestral reverse chain from x_T ~ N(0, I):
///   x_{t-1} = (x_t - beta_t / sqrt(1 - alpha_bar_t) eps_hat) / sqrt(alpha_t) + sqrt(beta_t) z,
/// with z = 0 on the final step.
std::vector<Vector> ancestral_sample(const NoiseSchedule& schedule, std::size_t dim, std::size_t n,
                                     std::uint64_t rng_seed, const NoisePredictor& predictor);

/// ancestral_sample with the ToyDiffusion denoiser as predictor. Throws
/// std::invalid_argument for other families.
std::vector<Vector> diffusion_sample(const ModelSpec& spec, const Params& params, std::size_t n,
                                     std::uint64_t rng_seed);

}  // namespace trcl
