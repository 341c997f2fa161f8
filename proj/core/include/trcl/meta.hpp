#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "trcl/continual.hpp"
#include "trcl/models.hpp"

namespace trcl {

struct MetaConfig {
    double alpha = 1e-2;  ///< inner step size
    double eta = 1e-2;    ///< outer step size
    int inner_steps = 1;  ///< fixed at one adaptation step
    bool first_order = true;

    void validate() const;
};

struct SupportQuery {
    Batch support;
    Batch query;
};

/// Shuffles `batch` with `rng_seed` and splits it into halves; an odd batch
/// gives the extra sample to the support half. Needs at least two samples.
SupportQuery split_support_query(std::span<const Sample> batch, std::uint64_t rng_seed);

/// theta - alpha grad(spec, theta, support)
Params maml_inner_step(const ModelSpec& spec, const Params& theta, std::span<const Sample> support, double alpha,
                       std::uint64_t rng_seed);

struct MamlUpdate {
    Params theta;
    Params adapted;     ///< theta' after the inner step
    Vector query_grad;  ///< (I): grad of the query loss at theta'
    Vector correction;  ///< (II): H_support(theta) (I); zero for first-order updates
};

/// theta - eta (I - alpha H_support(theta)) grad L(theta'; query), with the
/// explicit support Hessian. Parameter dimension is capped at kMaxFullDimension.
MamlUpdate maml_outer_update_exact(const ModelSpec& spec, const Params& theta, const SupportQuery& sq,
                                   const MetaConfig& cfg, std::uint64_t rng_seed);

/// theta - eta grad L(theta'; query)
MamlUpdate maml_outer_update_first_order(const ModelSpec& spec, const Params& theta, const SupportQuery& sq,
                                         const MetaConfig& cfg, std::uint64_t rng_seed);

/// Draws a batch for one task; an empty result means no data is available.
struct MetaTaskSource {
    int task_id = 0;
    std::function<Batch(std::uint64_t rng_seed)> draw;
};

/// Uniform index in [0, n_tasks) keyed by (rng_seed, attempt).
std::size_t sample_task_index(std::size_t n_tasks, std::uint64_t rng_seed, std::size_t attempt = 0);

struct FtmlResult {
    MamlUpdate update;
    int task_id = 0;
};

/// One online-meta step: picks a task uniformly from seen + current,
/// splits its batch into support/query and applies the configured outer
/// update. Tasks that return no data are excluded and the pick repeated;
/// throws std::runtime_error when every task is empty.
FtmlResult ftml_step(const ModelSpec& spec, const Params& theta, std::span<const MetaTaskSource> seen_tasks,
                     const MetaTaskSource& current_task, const MetaConfig& cfg, std::uint64_t rng_seed);

struct EquivalenceGap {
    double gap_I_B = 0.0;
    double gap_II_C = 0.0;
    double delta_norm = 0.0;
};

/// How far the old-task MAML terms are from the trust-region terms at theta.
///
///   gap_I_B  = ||grad L(theta'; query) - grad L(theta; replay)|| / max(||grad L(theta'; query)||, 1e-12)
///   gap_II_C = ||alpha H_support(theta) grad L(theta; query) - lambda F (theta - theta*)||
///              / max(||alpha H_support(theta) grad L(theta; query)||, 1e-12)
///
/// The curvature term uses the query gradient at theta: the evaluation-point
/// shift theta -> theta' is what gap_I_B measures, so gap_II_C isolates the
/// linearization and curvature identifications.
EquivalenceGap equivalence_gap(const ModelSpec& spec, const Params& theta, const TaskAnchor& anchor,
                               std::span<const Sample> replay_batch, const SupportQuery& sq, const MetaConfig& cfg,
                               double lambda, std::uint64_t rng_seed = 0);

}  // namespace trcl
