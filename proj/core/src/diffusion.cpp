#include "trcl/diffusion.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "trcl/rng.hpp"

namespace trcl {

DiffusionDraw diffusion_draw(std::uint64_t rng_seed, std::size_t sample_index, std::size_t dim,
                             int steps) {
    auto gen = keyed_engine({rng_seed, tag(Stream::DiffusionDraw), sample_index});
    std::uniform_int_distribution<int> pick(1, steps);
    DiffusionDraw d;
    d.t = pick(gen);
    d.eps = standard_normal(gen, dim);
    return d;
}

Vector forward_marginal(const Vector& x0, double alpha_bar, const Vector& eps) {
    require_same_size(x0, eps, "forward_marginal");
    if (!(alpha_bar >= 0.0 && alpha_bar <= 1.0))
        throw std::invalid_argument("forward_marginal: alpha_bar must lie in [0,1]");
    const double a = std::sqrt(alpha_bar);
    const double s = std::sqrt(1.0 - alpha_bar);
    Vector out(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) out[i] = a * x0[i] + s * eps[i];
    return out;
}

Vector diffusion_forward(const Vector& x0, int t, const Vector& eps, const NoiseSchedule& schedule) {
    if (t < 1 || t > schedule.steps) {
        throw std::out_of_range("diffusion_forward: t=" + std::to_string(t) + " outside 1.." +
                                std::to_string(schedule.steps));
    }
    return forward_marginal(x0, schedule.alpha_bar(t), eps);
}

Vector timestep_features(int t, int steps) {
    const double s = static_cast<double>(t) / static_cast<double>(steps);
    Vector f(kTimeFeatures);
    for (std::size_t k = 0; k < kTimeFeatures / 2; ++k) {
        const double w = std::numbers::pi * static_cast<double>(1u << k) * s;
        f[2 * k] = std::sin(w);
        f[2 * k + 1] = std::cos(w);
    }
    return f;
}

double noise_prediction_loss(const NoiseSchedule& schedule, std::span<const Sample> batch,
                             std::uint64_t rng_seed, const NoisePredictor& predictor) {
    if (batch.empty()) throw std::invalid_argument("noise_prediction_loss: empty batch");
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Vector& x0 = batch[i].input;
        const DiffusionDraw draw = diffusion_draw(rng_seed, i, x0.size(), schedule.steps);
        const Vector x_t = diffusion_forward(x0, draw.t, draw.eps, schedule);
        const Vector eps_hat = predictor(x_t, draw.t);
        require_same_size(eps_hat, draw.eps, "noise_prediction_loss");
        double sq = 0.0;
        for (std::size_t k = 0; k < eps_hat.size(); ++k) {
            const double r = draw.eps[k] - eps_hat[k];
            sq += r * r;
        }
        total += sq;
    }
    return total / static_cast<double>(batch.size());
}

std::vector<Vector> ancestral_sample(const NoiseSchedule& schedule, std::size_t dim, std::size_t n,
                                     std::uint64_t rng_seed, const NoisePredictor& predictor) {
    std::vector<Vector> out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        // One stream per sample: x_T first, then the per-step noise.
        auto gen = keyed_engine({rng_seed, tag(Stream::DiffusionInit), j});
        Vector x = standard_normal(gen, dim);
        for (int t = schedule.steps; t >= 1; --t) {
            const Vector eps_hat = predictor(x, t);
            require_same_size(eps_hat, x, "ancestral_sample");
            const double beta = schedule.beta(t);
            const double coef = beta / std::sqrt(1.0 - schedule.alpha_bar(t));
            const double inv_sqrt_alpha = 1.0 / std::sqrt(schedule.alpha(t));
            for (std::size_t k = 0; k < dim; ++k) x[k] = inv_sqrt_alpha * (x[k] - coef * eps_hat[k]);
            if (t > 1) x.add_scaled(std::sqrt(beta), standard_normal(gen, dim));
        }
        out.push_back(std::move(x));
    }
    return out;
}

std::vector<Vector> diffusion_sample(const ModelSpec& spec, const Params& params, std::size_t n,
                                     std::uint64_t rng_seed) {
    if (spec.family != ModelFamily::ToyDiffusion)
        throw std::invalid_argument("diffusion_sample: spec family is " + to_string(spec.family));
    if (params.size() != spec.param_dim()) throw DimensionError("diffusion_sample: params dimension");
    const NoiseSchedule& sched = *spec.schedule;
    const std::size_t dim = spec.input_dim();
    NoisePredictor predictor = [&](const Vector& x_t, int t) {
        const Vector feats = timestep_features(t, sched.steps);
        Vector in(dim + feats.size());
        for (std::size_t i = 0; i < dim; ++i) in[i] = x_t[i];
        for (std::size_t i = 0; i < feats.size(); ++i) in[dim + i] = feats[i];
        return mlp_forward(spec, params, in);
    };
    return ancestral_sample(sched, dim, n, rng_seed, predictor);
}

}  // namespace trcl
