#include "trcl/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "trcl/diffusion.hpp"
#include "trcl/rng.hpp"

namespace trcl {

namespace {

double activate(Activation a, double z) {
    switch (a) {
        case Activation::Tanh: return std::tanh(z);
        case Activation::Softplus: return z > 30.0 ? z : std::log1p(std::exp(z));
    }
    return z;
}

double activate_deriv(Activation a, double z, double out) {
    switch (a) {
        case Activation::Tanh: return 1.0 - out * out;
        case Activation::Softplus: return 1.0 / (1.0 + std::exp(-z));
    }
    return 1.0;
}

/// Feed-forward network over a flat parameter span. Layer l stores
/// W_l (rows = out, cols = in, row-major) followed by b_l.
class MlpNet {
public:
    MlpNet(const std::vector<std::size_t>& sizes, Activation act, std::span<const double> params)
        : sizes_(sizes), act_(act), params_(params) {}

    /// Runs the network and keeps pre/post activations for backward().
    const std::vector<double>& forward(std::span<const double> input) {
        const std::size_t layers = sizes_.size() - 1;
        post_.resize(layers + 1);
        pre_.resize(layers);
        post_[0].assign(input.begin(), input.end());
        std::size_t offset = 0;
        for (std::size_t l = 0; l < layers; ++l) {
            const std::size_t in = sizes_[l];
            const std::size_t out = sizes_[l + 1];
            const double* w = params_.data() + offset;
            const double* b = w + in * out;
            auto& z = pre_[l];
            z.assign(out, 0.0);
            for (std::size_t o = 0; o < out; ++o) {
                double acc = b[o];
                const double* wr = w + o * in;
                for (std::size_t i = 0; i < in; ++i) acc += wr[i] * post_[l][i];
                z[o] = acc;
            }
            auto& a = post_[l + 1];
            a.resize(out);
            const bool hidden = l + 1 < layers;
            for (std::size_t o = 0; o < out; ++o) a[o] = hidden ? activate(act_, z[o]) : z[o];
            offset += in * out + out;
        }
        return post_.back();
    }

    /// Accumulates scale * d(out . dout)/d(params) into `grad`. Must follow
    /// forward() on the same input.
    void backward(std::span<const double> dout, double scale, std::span<double> grad) {
        const std::size_t layers = sizes_.size() - 1;
        std::vector<std::size_t> offsets(layers);
        std::size_t offset = 0;
        for (std::size_t l = 0; l < layers; ++l) {
            offsets[l] = offset;
            offset += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
        }
        std::vector<double> delta(dout.begin(), dout.end());
        std::vector<double> prev;
        for (std::size_t l = layers; l-- > 0;) {
            const std::size_t in = sizes_[l];
            const std::size_t out = sizes_[l + 1];
            const double* w = params_.data() + offsets[l];
            double* gw = grad.data() + offsets[l];
            double* gb = gw + in * out;
            const auto& a = post_[l];
            for (std::size_t o = 0; o < out; ++o) {
                const double d = scale * delta[o];
                double* gwr = gw + o * in;
                for (std::size_t i = 0; i < in; ++i) gwr[i] += d * a[i];
                gb[o] += d;
            }
            if (l == 0) break;
            prev.assign(in, 0.0);
            for (std::size_t o = 0; o < out; ++o) {
                const double* wr = w + o * in;
                for (std::size_t i = 0; i < in; ++i) prev[i] += wr[i] * delta[o];
            }
            for (std::size_t i = 0; i < in; ++i)
                prev[i] *= activate_deriv(act_, pre_[l - 1][i], post_[l][i]);
            delta.swap(prev);
        }
    }

private:
    const std::vector<std::size_t>& sizes_;
    Activation act_;
    std::span<const double> params_;
    std::vector<std::vector<double>> pre_;
    std::vector<std::vector<double>> post_;
};

std::size_t mlp_param_count(const std::vector<std::size_t>& sizes) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) n += sizes[l] * sizes[l + 1] + sizes[l + 1];
    return n;
}

void check_call(const ModelSpec& spec, const Params& params, std::span<const Sample> batch) {
    if (batch.empty()) throw std::invalid_argument("model: empty batch");
    if (params.size() != spec.param_dim()) {
        throw DimensionError("model: params dim " + std::to_string(params.size()) + " vs spec dim " +
                             std::to_string(spec.param_dim()));
    }
    const std::size_t in = spec.input_dim();
    for (const Sample& s : batch) {
        if (s.input.size() != in) throw DimensionError("model: sample input dimension mismatch");
    }
    if (spec.family == ModelFamily::Mlp) {
        const std::size_t out = spec.layer_sizes.back();
        for (const Sample& s : batch) {
            if (!s.target || s.target->size() != out)
                throw DimensionError("model: Mlp sample target missing or wrong dimension");
        }
    }
}

Vector featurize(const Vector& x_t, int t, int steps) {
    Vector feats = timestep_features(t, steps);
    Vector in(x_t.size() + feats.size());
    for (std::size_t i = 0; i < x_t.size(); ++i) in[i] = x_t[i];
    for (std::size_t i = 0; i < feats.size(); ++i) in[x_t.size() + i] = feats[i];
    return in;
}

/// Per-sample loss; when `grad` is non-empty adds scale * per-sample gradient.
double sample_loss(const ModelSpec& spec, const Params& params, const Sample& s, std::size_t index,
                   std::uint64_t rng_seed, MlpNet* net, double scale, std::span<double> grad) {
    switch (spec.family) {
        case ModelFamily::GaussianMean: {
            const std::size_t d = params.size();
            double sq = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double r = params[i] - s.input[i];
                sq += r * r;
                if (!grad.empty()) grad[i] += scale * r;
            }
            return 0.5 * sq + 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi);
        }
        case ModelFamily::Quadratic: {
            Vector r = params - s.input;
            Vector ar = curvature_apply(*spec.quadratic, r);
            if (!grad.empty())
                for (std::size_t i = 0; i < r.size(); ++i) grad[i] += scale * ar[i];
            return 0.5 * dot(r, ar);
        }
        case ModelFamily::Mlp: {
            const auto& y = net->forward(s.input.span());
            const Vector& target = *s.target;
            std::vector<double> dout(y.size());
            double sq = 0.0;
            for (std::size_t k = 0; k < y.size(); ++k) {
                const double r = y[k] - target[k];
                sq += r * r;
                dout[k] = 2.0 * r;
            }
            if (!grad.empty()) net->backward(dout, scale, grad);
            return sq;
        }
        case ModelFamily::ToyDiffusion: {
            const NoiseSchedule& sched = *spec.schedule;
            const DiffusionDraw draw = diffusion_draw(rng_seed, index, s.input.size(), sched.steps);
            const Vector x_t = diffusion_forward(s.input, draw.t, draw.eps, sched);
            const Vector in = featurize(x_t, draw.t, sched.steps);
            const auto& eps_hat = net->forward(in.span());
            std::vector<double> dout(eps_hat.size());
            double sq = 0.0;
            for (std::size_t k = 0; k < eps_hat.size(); ++k) {
                const double r = eps_hat[k] - draw.eps[k];
                sq += r * r;
                dout[k] = 2.0 * r;
            }
            if (!grad.empty()) net->backward(dout, scale, grad);
            return sq;
        }
    }
    throw std::logic_error("unhandled model family");
}

double accumulate(const ModelSpec& spec, const Params& params, std::span<const Sample> batch,
                  std::uint64_t rng_seed, std::span<double> grad) {
    check_call(spec, params, batch);
    MlpNet net(spec.layer_sizes, spec.activation, params.span());
    const double scale = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        total += sample_loss(spec, params, batch[i], i, rng_seed, &net, scale, grad);
    }
    return total * scale;
}

}  // namespace

std::string to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::GaussianMean: return "GaussianMean";
        case ModelFamily::Mlp: return "Mlp";
        case ModelFamily::ToyDiffusion: return "ToyDiffusion";
        case ModelFamily::Quadratic: return "Quadratic";
    }
    return "?";
}

std::string to_string(Activation a) {
    return a == Activation::Tanh ? "tanh" : "softplus";
}

ModelFamily parse_model_family(const std::string& name) {
    if (name == "GaussianMean") return ModelFamily::GaussianMean;
    if (name == "Mlp") return ModelFamily::Mlp;
    if (name == "ToyDiffusion") return ModelFamily::ToyDiffusion;
    if (name == "Quadratic") return ModelFamily::Quadratic;
    throw std::invalid_argument("unknown model family: " + name);
}

Activation parse_activation(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "softplus") return Activation::Softplus;
    throw std::invalid_argument("unknown activation: " + name);
}

NoiseSchedule NoiseSchedule::from_betas(Vector betas) {
    if (betas.empty()) throw std::invalid_argument("NoiseSchedule: at least one step required");
    NoiseSchedule s;
    s.steps = static_cast<int>(betas.size());
    s.alphas = Vector(betas.size());
    s.alpha_bars = Vector(betas.size());
    double prod = 1.0;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!(betas[i] > 0.0 && betas[i] < 1.0))
            throw std::invalid_argument("NoiseSchedule: beta must lie in (0,1)");
        s.alphas[i] = 1.0 - betas[i];
        prod *= s.alphas[i];
        s.alpha_bars[i] = prod;
    }
    s.betas = std::move(betas);
    return s;
}

NoiseSchedule NoiseSchedule::linear(int steps, double beta_start, double beta_end) {
    if (steps <= 0) throw std::invalid_argument("NoiseSchedule: steps must be positive");
    Vector betas(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
        betas[static_cast<std::size_t>(i)] = beta_start + frac * (beta_end - beta_start);
    }
    return from_betas(std::move(betas));
}

ModelSpec ModelSpec::gaussian_mean(std::size_t dim) {
    ModelSpec s;
    s.family = ModelFamily::GaussianMean;
    s.layer_sizes = {dim};
    s.validate();
    return s;
}

ModelSpec ModelSpec::mlp(std::vector<std::size_t> layer_sizes, Activation act) {
    ModelSpec s;
    s.family = ModelFamily::Mlp;
    s.layer_sizes = std::move(layer_sizes);
    s.activation = act;
    s.validate();
    return s;
}

ModelSpec ModelSpec::toy_diffusion(std::size_t data_dim, std::vector<std::size_t> hidden,
                                   NoiseSchedule schedule, Activation act) {
    ModelSpec s;
    s.family = ModelFamily::ToyDiffusion;
    s.layer_sizes.push_back(data_dim + kTimeFeatures);
    s.layer_sizes.insert(s.layer_sizes.end(), hidden.begin(), hidden.end());
    s.layer_sizes.push_back(data_dim);
    s.schedule = std::move(schedule);
    s.activation = act;
    s.validate();
    return s;
}

ModelSpec ModelSpec::toy_diffusion_default(std::size_t data_dim) {
    return toy_diffusion(data_dim, {32, 32}, NoiseSchedule::linear(32, 1e-4, 0.2));
}

ModelSpec ModelSpec::quadratic_task(Curvature a) {
    ModelSpec s;
    s.family = ModelFamily::Quadratic;
    s.layer_sizes = {a.dim()};
    s.quadratic = std::move(a);
    s.validate();
    return s;
}

void ModelSpec::validate() const {
    if (layer_sizes.empty()) throw std::invalid_argument("ModelSpec: layer_sizes is empty");
    for (std::size_t n : layer_sizes)
        if (n == 0) throw std::invalid_argument("ModelSpec: zero layer size");
    switch (family) {
        case ModelFamily::GaussianMean:
            if (layer_sizes.size() != 1) throw std::invalid_argument("GaussianMean: layer_sizes must be {d}");
            break;
        case ModelFamily::Quadratic:
            if (!quadratic || layer_sizes.size() != 1 || quadratic->dim() != layer_sizes[0])
                throw std::invalid_argument("Quadratic: curvature missing or wrong dimension");
            break;
        case ModelFamily::Mlp:
            if (layer_sizes.size() < 2) throw std::invalid_argument("Mlp: need at least {in, out}");
            break;
        case ModelFamily::ToyDiffusion:
            if (!schedule) throw std::invalid_argument("ToyDiffusion: schedule required");
            if (layer_sizes.size() < 2 || layer_sizes.front() != layer_sizes.back() + kTimeFeatures)
                throw std::invalid_argument("ToyDiffusion: layer_sizes must be {d + time features, ..., d}");
            break;
    }
}

std::size_t ModelSpec::param_dim() const {
    switch (family) {
        case ModelFamily::GaussianMean:
        case ModelFamily::Quadratic: return layer_sizes.front();
        case ModelFamily::Mlp:
        case ModelFamily::ToyDiffusion: return mlp_param_count(layer_sizes);
    }
    return 0;
}

std::size_t ModelSpec::input_dim() const {
    switch (family) {
        case ModelFamily::GaussianMean:
        case ModelFamily::Quadratic:
        case ModelFamily::Mlp: return layer_sizes.front();
        case ModelFamily::ToyDiffusion: return layer_sizes.back();
    }
    return 0;
}

Params init_params(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    Params p(spec.param_dim());
    if (spec.family == ModelFamily::GaussianMean || spec.family == ModelFamily::Quadratic) return p;
    auto gen = keyed_engine({seed, tag(Stream::Init)});
    std::normal_distribution<double> normal(0.0, 1.0);
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
        const std::size_t in = spec.layer_sizes[l];
        const std::size_t out = spec.layer_sizes[l + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        for (std::size_t k = 0; k < in * out; ++k) p[offset + k] = scale * normal(gen);
        offset += in * out + out;  // biases start at zero
    }
    return p;
}

double loss(const ModelSpec& spec, const Params& params, std::span<const Sample> batch,
            std::uint64_t rng_seed) {
    return accumulate(spec, params, batch, rng_seed, {});
}

Vector grad(const ModelSpec& spec, const Params& params, std::span<const Sample> batch,
            std::uint64_t rng_seed) {
    return loss_and_grad(spec, params, batch, rng_seed).grad;
}

LossAndGrad loss_and_grad(const ModelSpec& spec, const Params& params, std::span<const Sample> batch,
                          std::uint64_t rng_seed) {
    LossAndGrad out;
    out.grad = Vector(params.size());
    out.loss = accumulate(spec, params, batch, rng_seed, out.grad.span());
    return out;
}

std::vector<Vector> per_sample_grads(const ModelSpec& spec, const Params& params,
                                     std::span<const Sample> batch, std::uint64_t rng_seed) {
    check_call(spec, params, batch);
    MlpNet net(spec.layer_sizes, spec.activation, params.span());
    std::vector<Vector> out;
    out.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Vector g(params.size());
        sample_loss(spec, params, batch[i], i, rng_seed, &net, 1.0, g.span());
        out.push_back(std::move(g));
    }
    return out;
}

Matrix hessian(const ModelSpec& spec, const Params& params, std::span<const Sample> batch,
               std::uint64_t rng_seed) {
    const std::size_t n = spec.param_dim();
    if (n > kMaxFullDimension) {
        throw DimensionError("hessian: parameter dimension " + std::to_string(n) + " exceeds cap " +
                             std::to_string(kMaxFullDimension));
    }
    check_call(spec, params, batch);
    if (spec.family == ModelFamily::GaussianMean) return Matrix::identity(n);
    if (spec.family == ModelFamily::Quadratic) return spec.quadratic->to_matrix();

    Matrix h(n, n);
    Params probe = params;
    for (std::size_t j = 0; j < n; ++j) {
        const double orig = probe[j];
        probe[j] = orig + kHessianStep;
        const Vector gp = grad(spec, probe, batch, rng_seed);
        probe[j] = orig - kHessianStep;
        const Vector gm = grad(spec, probe, batch, rng_seed);
        probe[j] = orig;
        for (std::size_t i = 0; i < n; ++i) h(i, j) = (gp[i] - gm[i]) / (2.0 * kHessianStep);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (h(i, j) + h(j, i));
            h(i, j) = avg;
            h(j, i) = avg;
        }
    return h;
}

Vector mlp_forward(const ModelSpec& spec, const Params& params, const Vector& input) {
    if (spec.family != ModelFamily::Mlp && spec.family != ModelFamily::ToyDiffusion)
        throw std::invalid_argument("mlp_forward: family has no network");
    if (params.size() != spec.param_dim()) throw DimensionError("mlp_forward: params dimension");
    if (input.size() != spec.layer_sizes.front()) throw DimensionError("mlp_forward: input dimension");
    MlpNet net(spec.layer_sizes, spec.activation, params.span());
    return Vector(net.forward(input.span()));
}

}  // namespace trcl
