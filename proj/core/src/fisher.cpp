#include "trcl/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trcl/rng.hpp"

namespace trcl {

std::string to_string(FisherMode m) {
    switch (m) {
        case FisherMode::Full: return "Full";
        case FisherMode::Diagonal: return "Diagonal";
        case FisherMode::RankOne: return "RankOne";
    }
    return "?";
}

FisherMode parse_fisher_mode(const std::string& name) {
    if (name == "Full") return FisherMode::Full;
    if (name == "Diagonal") return FisherMode::Diagonal;
    if (name == "RankOne") return FisherMode::RankOne;
    throw std::invalid_argument("unknown fisher mode: " + name);
}

double mean_pairwise_cosine(std::span<const Vector> vectors) {
    const std::size_t n = std::min(vectors.size(), kCollinearitySampleCap);
    if (n < 2) return 1.0;
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) norms[i] = norm2(vectors[i]);
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            ++pairs;
            if (norms[i] == 0.0 || norms[j] == 0.0) continue;
            total += dot(vectors[i], vectors[j]) / (norms[i] * norms[j]);
        }
    return total / static_cast<double>(pairs);
}

FisherEstimate fisher_from_gradients(std::span<const Vector> grads, FisherMode mode) {
    if (grads.empty()) throw std::invalid_argument("fisher: no gradients");
    const std::size_t d = grads.front().size();
    for (const Vector& g : grads) {
        if (g.size() != d) throw DimensionError("fisher: gradients of differing dimension");
    }
    const double inv_n = 1.0 / static_cast<double>(grads.size());

    auto build = [&]() -> std::pair<Curvature, bool> {
        switch (mode) {
            case FisherMode::Full: {
                if (d > kMaxFullDimension)
                    throw DimensionError("fisher: Full mode above dimension cap " +
                                         std::to_string(kMaxFullDimension));
                Matrix f(d, d);
                for (const Vector& g : grads) f.add_outer(1.0, g);
                f *= inv_n;
                return {Curvature::full(std::move(f)), false};
            }
            case FisherMode::Diagonal: {
                Vector diag(d);
                for (const Vector& g : grads)
                    for (std::size_t i = 0; i < d; ++i) diag[i] += g[i] * g[i];
                diag *= inv_n;
                return {Curvature::diagonal(std::move(diag)), false};
            }
            case FisherMode::RankOne: {
                Vector mean(d);
                for (const Vector& g : grads) mean += g;
                mean *= inv_n;
                const double mn = norm2(mean);
                if (!(mn >= kDegenerateMeanGradNorm)) {
                    return {Curvature::rank_one(0.0, Vector::basis(d, 0)), true};
                }
                Vector u = (1.0 / mn) * std::move(mean);
                double rho = 0.0;
                for (const Vector& g : grads) {
                    const double p = dot(g, u);
                    rho += p * p;
                }
                rho *= inv_n;
                return {Curvature::rank_one(rho, std::move(u)), false};
            }
        }
        throw std::logic_error("unhandled fisher mode");
    };

    auto [curv, degenerate] = build();
    FisherEstimate est{std::move(curv), degenerate, mean_pairwise_cosine(grads), grads.size()};
    return est;
}

FisherEstimate empirical_fisher(const ModelSpec& spec, const Params& params, std::span<const Sample> data,
                                FisherMode mode, std::uint64_t rng_seed) {
    if (data.empty()) throw std::invalid_argument("empirical_fisher: no data");
    const std::vector<Vector> grads = per_sample_grads(spec, params, data, rng_seed);
    return fisher_from_gradients(grads, mode);
}

Vector softmax(const Vector& logits) {
    double mx = logits[0];
    for (double z : logits) mx = std::max(mx, z);
    Vector p(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        total += p[i];
    }
    p *= 1.0 / total;
    return p;
}

FisherHessianReport fisher_hessian_check(const ExpFamily& family, const Params& params,
                                         std::size_t n_model_samples, std::uint64_t rng_seed) {
    if (n_model_samples == 0) throw std::invalid_argument("fisher_hessian_check: n must be positive");
    const std::size_t d = family.dim;
    if (params.size() != d) throw DimensionError("fisher_hessian_check: params dimension");

    FisherHessianReport report;
    report.n = n_model_samples;
    report.fisher = Matrix(d, d);
    report.expected_hessian = Matrix(d, d);
    auto gen = keyed_engine({rng_seed, tag(Stream::ModelSample)});

    switch (family.kind) {
        case ExpFamily::Kind::GaussianMean: {
            // x ~ N(mu, I); g = mu - x; per-sample Hessian is I.
            for (std::size_t s = 0; s < n_model_samples; ++s) {
                const Vector z = standard_normal(gen, d);
                report.fisher.add_outer(1.0, -1.0 * z);
                for (std::size_t i = 0; i < d; ++i) report.expected_hessian(i, i) += 1.0;
            }
            break;
        }
        case ExpFamily::Kind::Categorical: {
            if (d < 2 || d > 4)
                throw std::invalid_argument("fisher_hessian_check: categorical needs 2..4 classes");
            // k ~ softmax(z); g = p - e_k; Hessian of -log p_k is diag(p) - p p^T.
            const Vector p = softmax(params);
            std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
            Matrix h(d, d);
            for (std::size_t i = 0; i < d; ++i) h(i, i) = p[i];
            h.add_outer(-1.0, p);
            for (std::size_t s = 0; s < n_model_samples; ++s) {
                const std::size_t k = pick(gen);
                Vector g = p;
                g[k] -= 1.0;
                report.fisher.add_outer(1.0, g);
                report.expected_hessian += h;
            }
            break;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n_model_samples);
    report.fisher *= inv_n;
    report.expected_hessian *= inv_n;
    report.frobenius_rel_err =
        frobenius_norm(report.fisher - report.expected_hessian) / frobenius_norm(report.fisher);
    return report;
}

}  // namespace trcl
