#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trcl/models.hpp"
#include "trcl/replay.hpp"

namespace trcl {

enum class StreamFamily { GaussianShift, SinusoidRegression, Mixture2DDiffusion };

std::string to_string(StreamFamily f);
StreamFamily parse_stream_family(const std::string& name);

struct TaskStreamSpec {
    StreamFamily family = StreamFamily::GaussianShift;
    int n_tasks = 5;
    /// Scales the distance between task optima; 0 makes all tasks identical.
    double heterogeneity = 4.0;
    std::uint64_t seed = 0;
    std::size_t samples_per_task = 2000;
    double eval_fraction = 0.2;
    /// GaussianShift data dimension; 0 selects n_tasks + 1.
    std::size_t dim = 0;

    void validate() const;
};

/// Task i (1-based) of a GaussianShift stream has mean heterogeneity * d_i
/// with d_i = (e_0 + e_i) / sqrt(2): unit directions, pairwise one apart, so
/// every pair of task means is exactly `heterogeneity` apart.
Vector gaussian_shift_mean(const TaskStreamSpec& spec, int task_id);

/// y = amplitude * sin(x + phase) for a SinusoidRegression task.
struct SinusoidParams {
    double amplitude = 1.0;
    double phase = 0.0;
};
SinusoidParams sinusoid_params(const TaskStreamSpec& spec, int task_id);

/// Mixture component centers for a Mixture2DDiffusion task.
std::vector<Vector> mixture_centers(const TaskStreamSpec& spec, int task_id);

/// Ground-truth target function where the family defines one (Sinusoid).
TargetFn task_target(const TaskStreamSpec& spec, int task_id);

/// Deterministic in spec.seed. Task ids run 1..n_tasks.
std::vector<TaskDataset> make_task_stream(const TaskStreamSpec& spec);

/// Model used by default for each stream family.
ModelSpec default_model(const TaskStreamSpec& spec);

}  // namespace trcl
