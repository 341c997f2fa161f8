#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "trcl/models.hpp"

namespace trcl {

class UnknownTaskError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Per-task reservoir of stored samples.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity_per_task);

    /// Reservoir-samples `samples` down to the capacity (deterministic in
    /// (seed, task_id)). Storing a task again replaces its reservoir.
    void store(int task_id, std::span<const Sample> samples, std::uint64_t seed);

    [[nodiscard]] bool contains(int task_id) const { return per_task_.contains(task_id); }
    /// Throws UnknownTaskError.
    [[nodiscard]] const Batch& samples(int task_id) const;
    [[nodiscard]] std::size_t capacity_per_task() const noexcept { return capacity_; }
    [[nodiscard]] std::size_t task_count() const noexcept { return per_task_.size(); }

private:
    std::size_t capacity_;
    std::map<int, Batch> per_task_;
};

/// Maps a generated input to its target for supervised task families.
using TargetFn = std::function<Vector(const Vector&)>;

struct GeneratorSnapshot {
    ModelSpec spec;
    Params params;
    TargetFn target;
};

/// Frozen per-task generators (GaussianMean or ToyDiffusion snapshots).
class GenerativeReplaySource {
public:
    /// Deep-copies params. Throws std::invalid_argument for a duplicate
    /// task_id or a family that cannot generate inputs.
    void snapshot_generator(int task_id, const ModelSpec& spec, const Params& params, TargetFn target = {});

    [[nodiscard]] bool contains(int task_id) const { return per_task_.contains(task_id); }
    /// Throws UnknownTaskError.
    [[nodiscard]] const GeneratorSnapshot& snapshot(int task_id) const;
    [[nodiscard]] std::size_t task_count() const noexcept { return per_task_.size(); }

private:
    std::map<int, GeneratorSnapshot> per_task_;
};

/// n draws, uniform with replacement, from the task's stored samples.
Batch sample_replay_batch(const ReplayBuffer& buffer, int task_id, std::size_t n, std::uint64_t rng_seed);

/// n generated samples: N(theta, I) for GaussianMean snapshots, the reverse
/// chain for ToyDiffusion snapshots; targets attached when the snapshot has
/// a target function.
Batch sample_replay_batch(const GenerativeReplaySource& source, int task_id, std::size_t n,
                          std::uint64_t rng_seed);

}  // namespace trcl
