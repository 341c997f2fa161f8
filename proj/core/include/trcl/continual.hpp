#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trcl/curvature.hpp"
#include "trcl/fisher.hpp"
#include "trcl/models.hpp"

namespace trcl {

/// Frozen (theta*, F) pair recorded when a task finishes.
class TaskAnchor {
public:
    TaskAnchor(int task_id, Params theta_star, Curvature fisher, bool degenerate = false);

    [[nodiscard]] int task_id() const noexcept { return task_id_; }
    [[nodiscard]] const Params& theta_star() const noexcept { return theta_star_; }
    [[nodiscard]] const Curvature& fisher() const noexcept { return fisher_; }
    /// The Fisher estimate was degenerate (zero mean gradient in RankOne mode).
    [[nodiscard]] bool degenerate() const noexcept { return degenerate_; }

private:
    int task_id_;
    Params theta_star_;
    Curvature fisher_;
    bool degenerate_;
};

struct ContinualConfig {
    double lambda = 0.0;
    double beta = 0.0;
    double eta = 1e-2;
    FisherMode fisher_mode = FisherMode::RankOne;
    /// Diagnostic only; feasibility is logged, not enforced.
    std::optional<double> trust_radius;
    int steps_per_task = 500;
    int batch_size = 64;

    /// Throws std::invalid_argument on a sign or range violation.
    void validate() const;
};

struct ReplayBatch {
    int task_id = 0;
    Batch batch;
};

/// (lambda/2) sum_i (theta - theta*_i)^T F_i (theta - theta*_i).
double ewc_penalty(const Params& theta, std::span<const TaskAnchor> anchors, double lambda);

/// lambda sum_i F_i (theta - theta*_i); the exact gradient of ewc_penalty.
Vector ewc_grad_term(const Params& theta, std::span<const TaskAnchor> anchors, double lambda);

/// beta sum_i grad(spec, theta, batch_i). Batch i uses seed rng_seed + i.
Vector replay_grad_term(const ModelSpec& spec, const Params& theta, std::span<const ReplayBatch> replay,
                        double beta, std::uint64_t rng_seed);

/// The three gradient contributions of one continual step.
struct StepTerms {
    Vector current;  ///< gradient on the current-task batch
    Vector replay;   ///< replay / old-task query gradient
    Vector ewc;      ///< Fisher pull towards the anchors
    double current_loss = 0.0;
};

/// Replay batches are evaluated with seeds derived from rng_seed so the
/// current and replay terms never share diffusion draws.
StepTerms trust_region_terms(const ModelSpec& spec, const Params& theta, std::span<const Sample> current_batch,
                             std::span<const ReplayBatch> replay, std::span<const TaskAnchor> anchors,
                             const ContinualConfig& config, std::uint64_t rng_seed);

struct StepResult {
    Params theta;
    double current_loss = 0.0;
};

/// theta - eta (current + replay + ewc), summed in that order.
StepResult trust_region_step(const ModelSpec& spec, const Params& theta, std::span<const Sample> current_batch,
                             std::span<const ReplayBatch> replay, std::span<const TaskAnchor> anchors,
                             const ContinualConfig& config, std::uint64_t rng_seed);

/// sum_i (theta - theta*_i)^T F_i (theta - theta*_i) <= delta.
bool trust_region_feasible(const Params& theta, std::span<const TaskAnchor> anchors, double delta);

/// Anchor at the current parameters with the empirical Fisher over data.train.
TaskAnchor finalize_task(const ModelSpec& spec, const Params& theta, const TaskDataset& data, FisherMode mode,
                         std::uint64_t rng_seed);

/// Seed used for the replay batch at position `index` within a step.
std::uint64_t replay_seed(std::uint64_t rng_seed, std::size_t index);

}  // namespace trcl
