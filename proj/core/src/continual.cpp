#include "trcl/continual.hpp"

#include <stdexcept>

namespace trcl {

TaskAnchor::TaskAnchor(int task_id, Params theta_star, Curvature fisher, bool degenerate)
    : task_id_(task_id), theta_star_(std::move(theta_star)), fisher_(std::move(fisher)), degenerate_(degenerate) {
    if (fisher_.dim() != theta_star_.size())
        throw DimensionError("TaskAnchor: fisher dimension differs from theta_star dimension");
}

void ContinualConfig::validate() const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("ContinualConfig: lambda must be >= 0");
    if (!(beta >= 0.0)) throw std::invalid_argument("ContinualConfig: beta must be >= 0");
    if (!(eta > 0.0)) throw std::invalid_argument("ContinualConfig: eta must be > 0");
    if (trust_radius && !(*trust_radius > 0.0))
        throw std::invalid_argument("ContinualConfig: trust_radius must be > 0");
    if (steps_per_task <= 0) throw std::invalid_argument("ContinualConfig: steps_per_task must be > 0");
    if (batch_size <= 0) throw std::invalid_argument("ContinualConfig: batch_size must be > 0");
}

std::uint64_t replay_seed(std::uint64_t rng_seed, std::size_t index) {
    return rng_seed + 0x9e3779b97f4a7c15ull * (index + 1);
}

double ewc_penalty(const Params& theta, std::span<const TaskAnchor> anchors, double lambda) {
    double total = 0.0;
    for (const TaskAnchor& a : anchors) {
        require_same_size(theta, a.theta_star(), "ewc_penalty");
        total += quadratic_form(a.fisher(), theta - a.theta_star());
    }
    return 0.5 * lambda * total;
}

Vector ewc_grad_term(const Params& theta, std::span<const TaskAnchor> anchors, double lambda) {
    Vector out(theta.size());
    for (const TaskAnchor& a : anchors) {
        require_same_size(theta, a.theta_star(), "ewc_grad_term");
        out += curvature_apply(a.fisher(), theta - a.theta_star());
    }
    out *= lambda;
    return out;
}

Vector replay_grad_term(const ModelSpec& spec, const Params& theta, std::span<const ReplayBatch> replay,
                        double beta, std::uint64_t rng_seed) {
    Vector out(theta.size());
    if (beta == 0.0) return out;
    for (std::size_t i = 0; i < replay.size(); ++i) {
        out += grad(spec, theta, replay[i].batch, replay_seed(rng_seed, i));
    }
    out *= beta;
    return out;
}

StepTerms trust_region_terms(const ModelSpec& spec, const Params& theta, std::span<const Sample> current_batch,
                             std::span<const ReplayBatch> replay, std::span<const TaskAnchor> anchors,
                             const ContinualConfig& config, std::uint64_t rng_seed) {
    StepTerms terms;
    auto current = loss_and_grad(spec, theta, current_batch, rng_seed);
    terms.current = std::move(current.grad);
    terms.current_loss = current.loss;
    terms.replay = replay_grad_term(spec, theta, replay, config.beta, rng_seed);
    terms.ewc = ewc_grad_term(theta, anchors, config.lambda);
    return terms;
}

StepResult trust_region_step(const ModelSpec& spec, const Params& theta, std::span<const Sample> current_batch,
                             std::span<const ReplayBatch> replay, std::span<const TaskAnchor> anchors,
                             const ContinualConfig& config, std::uint64_t rng_seed) {
    StepTerms terms = trust_region_terms(spec, theta, current_batch, replay, anchors, config, rng_seed);
    Vector direction = std::move(terms.current);
    direction += terms.replay;
    direction += terms.ewc;
    StepResult result{theta, terms.current_loss};
    result.theta.add_scaled(-config.eta, direction);
    return result;
}

bool trust_region_feasible(const Params& theta, std::span<const TaskAnchor> anchors, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("trust_region_feasible: delta must be > 0");
    double total = 0.0;
    for (const TaskAnchor& a : anchors) total += quadratic_form(a.fisher(), theta - a.theta_star());
    return total <= delta;
}

TaskAnchor finalize_task(const ModelSpec& spec, const Params& theta, const TaskDataset& data, FisherMode mode,
                         std::uint64_t rng_seed) {
    if (data.train.empty()) throw std::invalid_argument("finalize_task: empty training set");
    FisherEstimate est = empirical_fisher(spec, theta, data.train, mode, rng_seed);
    return TaskAnchor(data.task_id, theta, std::move(est.curvature), est.degenerate);
}

}  // namespace trcl
