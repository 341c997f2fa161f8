#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trcl/curvature.hpp"
#include "trcl/linalg.hpp"

namespace trcl {

using Params = Vector;

struct Sample {
    Vector input;
    /// Absent for density models (GaussianMean, ToyDiffusion).
    std::optional<Vector> target;

    friend bool operator==(const Sample&, const Sample&) = default;
};

using Batch = std::vector<Sample>;

struct TaskDataset {
    int task_id = 0;
    Batch train;
    Batch eval;
};

/// Variance-preserving noise schedule indexed by t = 1..steps.
struct NoiseSchedule {
    int steps = 0;
    Vector betas;
    Vector alphas;
    Vector alpha_bars;

    /// Validates beta in (0,1) and derives alphas / cumulative products.
    static NoiseSchedule from_betas(Vector betas);
    /// Linearly spaced betas; steps == 1 uses beta_start.
    static NoiseSchedule linear(int steps, double beta_start, double beta_end);

    [[nodiscard]] double beta(int t) const { return betas[static_cast<std::size_t>(t - 1)]; }
    [[nodiscard]] double alpha(int t) const { return alphas[static_cast<std::size_t>(t - 1)]; }
    [[nodiscard]] double alpha_bar(int t) const { return alpha_bars[static_cast<std::size_t>(t - 1)]; }
};

enum class ModelFamily { GaussianMean, Mlp, ToyDiffusion, Quadratic };
enum class Activation { Tanh, Softplus };

std::string to_string(ModelFamily f);
std::string to_string(Activation a);
ModelFamily parse_model_family(const std::string& name);
Activation parse_activation(const std::string& name);

/// Number of sinusoidal timestep features appended to x_t for the denoiser.
inline constexpr std::size_t kTimeFeatures = 6;

/// Describes a differentiable toy model.
///
///  - GaussianMean: params are the mean of an isotropic unit-variance
///    Gaussian; layer_sizes = {d}. Per-sample loss is the exact NLL.
///  - Mlp: layer_sizes = {in, hidden..., out}; activation on hidden layers,
///    linear output; per-sample loss is the squared error summed over outputs.
///  - ToyDiffusion: noise-prediction denoiser. layer_sizes = {d + kTimeFeatures,
///    hidden..., d}; per-sample loss ||eps - eps_hat(x_t, t)||^2.
///  - Quadratic: 0.5 (theta - c)^T A (theta - c) with c the sample input and
///    A = `quadratic`; layer_sizes = {dim}.
///
/// Batch losses are means over samples.
struct ModelSpec {
    ModelFamily family = ModelFamily::GaussianMean;
    std::vector<std::size_t> layer_sizes;
    std::optional<NoiseSchedule> schedule;
    Activation activation = Activation::Tanh;
    std::optional<Curvature> quadratic;

    static ModelSpec gaussian_mean(std::size_t dim);
    static ModelSpec mlp(std::vector<std::size_t> layer_sizes, Activation act = Activation::Tanh);
    static ModelSpec toy_diffusion(std::size_t data_dim, std::vector<std::size_t> hidden,
                                   NoiseSchedule schedule, Activation act = Activation::Tanh);
    static ModelSpec toy_diffusion_default(std::size_t data_dim = 2);
    static ModelSpec quadratic_task(Curvature a);

    [[nodiscard]] std::size_t param_dim() const;
    /// Dimension of Sample::input.
    [[nodiscard]] std::size_t input_dim() const;
    /// Throws std::invalid_argument when the spec is internally inconsistent.
    void validate() const;
};

/// Small random initialization (scaled by fan-in for network weights;
/// zero for GaussianMean and Quadratic).
Params init_params(const ModelSpec& spec, std::uint64_t seed);

double loss(const ModelSpec& spec, const Params& params, std::span<const Sample> batch,
            std::uint64_t rng_seed);

/// Exact gradient of `loss` by hand-written backpropagation.
Vector grad(const ModelSpec& spec, const Params& params, std::span<const Sample> batch,
            std::uint64_t rng_seed);

struct LossAndGrad {
    double loss = 0.0;
    Vector grad;
};
LossAndGrad loss_and_grad(const ModelSpec& spec, const Params& params, std::span<const Sample> batch,
                          std::uint64_t rng_seed);

/// Gradient of each per-sample loss. Diffusion draws are keyed by the
/// sample's index in `batch`, so the mean of these equals grad(batch).
std::vector<Vector> per_sample_grads(const ModelSpec& spec, const Params& params,
                                     std::span<const Sample> batch, std::uint64_t rng_seed);

/// Step used by the central-difference Hessian.
inline constexpr double kHessianStep = 1e-5;

/// Exact for GaussianMean (identity) and Quadratic (A); central differences
/// of `grad` otherwise, symmetrized. Throws DimensionError above
/// kMaxFullDimension.
Matrix hessian(const ModelSpec& spec, const Params& params, std::span<const Sample> batch,
               std::uint64_t rng_seed);

/// Network output for one input (Mlp: prediction; ToyDiffusion: expects the
/// already-featurized input).
Vector mlp_forward(const ModelSpec& spec, const Params& params, const Vector& input);

}  // namespace trcl
