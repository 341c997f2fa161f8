#include "trcl/task_stream.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "trcl/rng.hpp"

namespace trcl {

namespace {

constexpr double kSinusoidRange = std::numbers::pi;
constexpr double kMixtureRadius = 1.5;
constexpr double kMixtureSpread = 0.15;

std::size_t gaussian_dim(const TaskStreamSpec& spec) {
    return spec.dim == 0 ? static_cast<std::size_t>(spec.n_tasks) + 1 : spec.dim;
}

}  // namespace

std::string to_string(StreamFamily f) {
    switch (f) {
        case StreamFamily::GaussianShift: return "GaussianShift";
        case StreamFamily::SinusoidRegression: return "SinusoidRegression";
        case StreamFamily::Mixture2DDiffusion: return "Mixture2DDiffusion";
    }
    return "?";
}

StreamFamily parse_stream_family(const std::string& name) {
    if (name == "GaussianShift") return StreamFamily::GaussianShift;
    if (name == "SinusoidRegression") return StreamFamily::SinusoidRegression;
    if (name == "Mixture2DDiffusion") return StreamFamily::Mixture2DDiffusion;
    throw std::invalid_argument("unknown stream family: " + name);
}

void TaskStreamSpec::validate() const {
    if (n_tasks < 2) throw std::invalid_argument("TaskStreamSpec: n_tasks must be >= 2");
    if (!(heterogeneity >= 0.0)) throw std::invalid_argument("TaskStreamSpec: heterogeneity must be >= 0");
    if (samples_per_task < 2) throw std::invalid_argument("TaskStreamSpec: samples_per_task must be >= 2");
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0))
        throw std::invalid_argument("TaskStreamSpec: eval_fraction must lie in (0,1)");
    if (family == StreamFamily::GaussianShift && dim != 0 && dim < static_cast<std::size_t>(n_tasks) + 1)
        throw std::invalid_argument("TaskStreamSpec: GaussianShift needs dim >= n_tasks + 1");
}

Vector gaussian_shift_mean(const TaskStreamSpec& spec, int task_id) {
    const std::size_t d = gaussian_dim(spec);
    if (task_id < 1 || task_id > spec.n_tasks) throw std::out_of_range("gaussian_shift_mean: task id");
    Vector m(d);
    const double s = spec.heterogeneity / std::numbers::sqrt2;
    m[0] = s;
    m[static_cast<std::size_t>(task_id)] = s;
    return m;
}

SinusoidParams sinusoid_params(const TaskStreamSpec& spec, int task_id) {
    auto gen = keyed_engine({spec.seed, tag(Stream::Dataset), static_cast<std::uint64_t>(task_id), 1});
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const double a = unif(gen);
    const double p = unif(gen);
    return {1.0 + 0.25 * spec.heterogeneity * a, 0.5 * spec.heterogeneity * p};
}

std::vector<Vector> mixture_centers(const TaskStreamSpec& spec, int task_id) {
    const double base = 0.5 * spec.heterogeneity * static_cast<double>(task_id - 1);
    std::vector<Vector> centers;
    for (int k = 0; k < 2; ++k) {
        const double ang = base + std::numbers::pi * k;
        centers.push_back(Vector{kMixtureRadius * std::cos(ang), kMixtureRadius * std::sin(ang)});
    }
    return centers;
}

TargetFn task_target(const TaskStreamSpec& spec, int task_id) {
    if (spec.family != StreamFamily::SinusoidRegression) return {};
    const SinusoidParams p = sinusoid_params(spec, task_id);
    return [p](const Vector& x) { return Vector{p.amplitude * std::sin(x[0] + p.phase)}; };
}

std::vector<TaskDataset> make_task_stream(const TaskStreamSpec& spec) {
    spec.validate();
    std::vector<TaskDataset> stream;
    const std::size_t n_eval = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(spec.eval_fraction * static_cast<double>(spec.samples_per_task))));
    const std::size_t n_train = spec.samples_per_task - n_eval;

    for (int task = 1; task <= spec.n_tasks; ++task) {
        auto gen = keyed_engine({spec.seed, tag(Stream::Dataset), static_cast<std::uint64_t>(task), 0});
        Batch samples;
        samples.reserve(spec.samples_per_task);
        switch (spec.family) {
            case StreamFamily::GaussianShift: {
                const Vector mean = gaussian_shift_mean(spec, task);
                for (std::size_t i = 0; i < spec.samples_per_task; ++i)
                    samples.push_back({mean + standard_normal(gen, mean.size()), std::nullopt});
                break;
            }
            case StreamFamily::SinusoidRegression: {
                const TargetFn target = task_target(spec, task);
                std::uniform_real_distribution<double> unif(-kSinusoidRange, kSinusoidRange);
                for (std::size_t i = 0; i < spec.samples_per_task; ++i) {
                    Vector x{unif(gen)};
                    Vector y = target(x);
                    samples.push_back({std::move(x), std::move(y)});
                }
                break;
            }
            case StreamFamily::Mixture2DDiffusion: {
                const auto centers = mixture_centers(spec, task);
                std::uniform_int_distribution<std::size_t> comp(0, centers.size() - 1);
                for (std::size_t i = 0; i < spec.samples_per_task; ++i) {
                    const Vector& c = centers[comp(gen)];
                    samples.push_back({c + kMixtureSpread * standard_normal(gen, 2), std::nullopt});
                }
                break;
            }
        }
        TaskDataset ds;
        ds.task_id = task;
        ds.train.assign(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n_train));
        ds.eval.assign(samples.begin() + static_cast<std::ptrdiff_t>(n_train), samples.end());
        stream.push_back(std::move(ds));
    }
    return stream;
}

ModelSpec default_model(const TaskStreamSpec& spec) {
    switch (spec.family) {
        case StreamFamily::GaussianShift: return ModelSpec::gaussian_mean(gaussian_dim(spec));
        case StreamFamily::SinusoidRegression: return ModelSpec::mlp({1, 32, 32, 1});
        case StreamFamily::Mixture2DDiffusion: return ModelSpec::toy_diffusion_default(2);
    }
    throw std::logic_error("unhandled stream family");
}

}  // namespace trcl
