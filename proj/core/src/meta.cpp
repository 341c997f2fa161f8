#include "trcl/meta.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "trcl/rng.hpp"

namespace trcl {

namespace {

std::uint64_t query_seed(std::uint64_t rng_seed) { return replay_seed(rng_seed, 0); }

}  // namespace

void MetaConfig::validate() const {
    if (!(alpha >= 0.0)) throw std::invalid_argument("MetaConfig: alpha must be >= 0");
    if (!(eta > 0.0)) throw std::invalid_argument("MetaConfig: eta must be > 0");
    if (inner_steps != 1) throw std::invalid_argument("MetaConfig: only one inner step is supported");
}

SupportQuery split_support_query(std::span<const Sample> batch, std::uint64_t rng_seed) {
    if (batch.size() < 2) throw std::invalid_argument("split_support_query: need at least two samples");
    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), 0);
    auto gen = keyed_engine({rng_seed, tag(Stream::Split)});
    std::shuffle(order.begin(), order.end(), gen);
    const std::size_t n_support = (batch.size() + 1) / 2;
    SupportQuery sq;
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_support ? sq.support : sq.query).push_back(batch[order[i]]);
    }
    return sq;
}

Params maml_inner_step(const ModelSpec& spec, const Params& theta, std::span<const Sample> support, double alpha,
                       std::uint64_t rng_seed) {
    Params adapted = theta;
    adapted.add_scaled(-alpha, grad(spec, theta, support, rng_seed));
    return adapted;
}

MamlUpdate maml_outer_update_exact(const ModelSpec& spec, const Params& theta, const SupportQuery& sq,
                                   const MetaConfig& cfg, std::uint64_t rng_seed) {
    cfg.validate();
    if (sq.support.empty() || sq.query.empty()) throw std::invalid_argument("maml: empty support or query");
    MamlUpdate out;
    out.adapted = maml_inner_step(spec, theta, sq.support, cfg.alpha, rng_seed);
    out.query_grad = grad(spec, out.adapted, sq.query, query_seed(rng_seed));
    const Matrix h = hessian(spec, theta, sq.support, rng_seed);
    out.correction = h * out.query_grad;
    Vector direction = out.query_grad;
    direction.add_scaled(-cfg.alpha, out.correction);
    out.theta = theta;
    out.theta.add_scaled(-cfg.eta, direction);
    return out;
}

MamlUpdate maml_outer_update_first_order(const ModelSpec& spec, const Params& theta, const SupportQuery& sq,
                                         const MetaConfig& cfg, std::uint64_t rng_seed) {
    cfg.validate();
    if (sq.support.empty() || sq.query.empty()) throw std::invalid_argument("maml: empty support or query");
    MamlUpdate out;
    out.adapted = maml_inner_step(spec, theta, sq.support, cfg.alpha, rng_seed);
    out.query_grad = grad(spec, out.adapted, sq.query, query_seed(rng_seed));
    out.correction = Vector(theta.size());
    out.theta = theta;
    out.theta.add_scaled(-cfg.eta, out.query_grad);
    return out;
}

std::size_t sample_task_index(std::size_t n_tasks, std::uint64_t rng_seed, std::size_t attempt) {
    if (n_tasks == 0) throw std::invalid_argument("sample_task_index: no tasks");
    auto gen = keyed_engine({rng_seed, tag(Stream::TaskPick), attempt});
    std::uniform_int_distribution<std::size_t> pick(0, n_tasks - 1);
    return pick(gen);
}

FtmlResult ftml_step(const ModelSpec& spec, const Params& theta, std::span<const MetaTaskSource> seen_tasks,
                     const MetaTaskSource& current_task, const MetaConfig& cfg, std::uint64_t rng_seed) {
    std::vector<const MetaTaskSource*> candidates;
    candidates.reserve(seen_tasks.size() + 1);
    for (const MetaTaskSource& s : seen_tasks) candidates.push_back(&s);
    candidates.push_back(&current_task);

    for (std::size_t attempt = 0; !candidates.empty(); ++attempt) {
        const std::size_t idx = sample_task_index(candidates.size(), rng_seed, attempt);
        const MetaTaskSource& task = *candidates[idx];
        Batch batch = task.draw ? task.draw(rng_seed) : Batch{};
        if (batch.size() < 2) {
            candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(idx));
            continue;
        }
        const SupportQuery sq = split_support_query(batch, rng_seed);
        FtmlResult result;
        result.task_id = task.task_id;
        result.update = cfg.first_order ? maml_outer_update_first_order(spec, theta, sq, cfg, rng_seed)
                                        : maml_outer_update_exact(spec, theta, sq, cfg, rng_seed);
        return result;
    }
    throw std::runtime_error("ftml_step: no task produced data");
}

EquivalenceGap equivalence_gap(const ModelSpec& spec, const Params& theta, const TaskAnchor& anchor,
                               std::span<const Sample> replay_batch, const SupportQuery& sq, const MetaConfig& cfg,
                               double lambda, std::uint64_t rng_seed) {
    cfg.validate();
    require_same_size(theta, anchor.theta_star(), "equivalence_gap");
    const Params adapted = maml_inner_step(spec, theta, sq.support, cfg.alpha, rng_seed);
    const Vector query_at_adapted = grad(spec, adapted, sq.query, query_seed(rng_seed));
    const Vector query_at_theta = grad(spec, theta, sq.query, query_seed(rng_seed));
    const Vector replay_at_theta = grad(spec, theta, replay_batch, query_seed(rng_seed));

    const Vector delta = theta - anchor.theta_star();
    const Matrix h_support = hessian(spec, theta, sq.support, rng_seed);
    const Vector term_ii = cfg.alpha * (h_support * query_at_theta);
    const Vector term_c = lambda * curvature_apply(anchor.fisher(), delta);

    EquivalenceGap gap;
    gap.gap_I_B = norm2(query_at_adapted - replay_at_theta) / std::max(norm2(query_at_adapted), 1e-12);
    gap.gap_II_C = norm2(term_ii - term_c) / std::max(norm2(term_ii), 1e-12);
    gap.delta_norm = norm2(delta);
    return gap;
}

}  // namespace trcl
