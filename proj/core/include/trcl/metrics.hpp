#pragma once

#include <map>
#include <optional>
#include <vector>

namespace trcl {

struct MetricsRecord {
    int step = 0;
    int task_in_training = 0;
    /// Held-out eval loss for every task seen so far.
    std::map<int, double> per_task_eval;
};

struct MetricsLog {
    std::vector<MetricsRecord> records;
    /// Set when training stopped on a non-finite loss; records are partial.
    bool diverged = false;

    /// Throws std::invalid_argument if steps are not strictly increasing or a
    /// record misses a task already seen.
    void validate() const;
};

struct ForgettingReport {
    /// final eval - best eval while the task was in training (signed).
    std::map<int, double> per_task;
    /// Mean over every task except the last one trained.
    double average = 0.0;
};

/// Throws std::invalid_argument for an empty log.
ForgettingReport compute_forgetting(const MetricsLog& log);

/// Lowest eval value recorded while `task_id` was in training.
double first_learning_baseline(const MetricsLog& log, int task_id);

/// Steps of the last record of each task that is followed by another task.
std::vector<int> transition_steps(const MetricsLog& log);

struct ThresholdSpec {
    enum class Kind {
        RelativeIncrease,  ///< eval <= (1 + tau) * baseline (lower-is-better metric)
        RelativeFraction,  ///< score >= alpha * baseline score, score = exp(-eval)
    };
    Kind kind = Kind::RelativeIncrease;
    double value = 0.2;

    static ThresholdSpec relative_increase(double tau);
    static ThresholdSpec relative_fraction(double alpha_frac);

    [[nodiscard]] bool met(double eval, double baseline) const;
};

/// Smallest (step - transition_step) over the records after the transition
/// (and before the next one) whose eval for `task_id` meets the threshold.
/// nullopt means the task never re-converged in that window. Throws
/// std::invalid_argument for an unknown task or a step that is not a
/// task boundary.
std::optional<int> steps_to_reconverge(const MetricsLog& log, int task_id, int transition_step,
                                       const ThresholdSpec& thr);

}  // namespace trcl
