#include "trcl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>

namespace trcl {

void MetricsLog::validate() const {
    std::set<int> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const MetricsRecord& r = records[i];
        if (i > 0 && r.step <= records[i - 1].step)
            throw std::invalid_argument("MetricsLog: steps must be strictly increasing");
        seen.insert(r.task_in_training);
        for (int t : seen) {
            if (!r.per_task_eval.contains(t))
                throw std::invalid_argument("MetricsLog: record at step " + std::to_string(r.step) +
                                            " misses task " + std::to_string(t));
        }
    }
}

double first_learning_baseline(const MetricsLog& log, int task_id) {
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (const MetricsRecord& r : log.records) {
        if (r.task_in_training != task_id) continue;
        found = true;
        best = std::min(best, r.per_task_eval.at(task_id));
    }
    if (!found) throw std::invalid_argument("task " + std::to_string(task_id) + " was never trained");
    return best;
}

ForgettingReport compute_forgetting(const MetricsLog& log) {
    if (log.records.empty()) throw std::invalid_argument("compute_forgetting: empty log");
    ForgettingReport report;
    const MetricsRecord& last = log.records.back();
    std::vector<int> trained;
    for (const MetricsRecord& r : log.records) {
        if (trained.empty() || trained.back() != r.task_in_training) trained.push_back(r.task_in_training);
    }
    for (int task : trained) {
        report.per_task[task] = last.per_task_eval.at(task) - first_learning_baseline(log, task);
    }
    if (trained.size() > 1) {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < trained.size(); ++i) total += report.per_task[trained[i]];
        report.average = total / static_cast<double>(trained.size() - 1);
    }
    return report;
}

std::vector<int> transition_steps(const MetricsLog& log) {
    std::vector<int> out;
    for (std::size_t i = 0; i + 1 < log.records.size(); ++i) {
        if (log.records[i].task_in_training != log.records[i + 1].task_in_training)
            out.push_back(log.records[i].step);
    }
    return out;
}

ThresholdSpec ThresholdSpec::relative_increase(double tau) {
    if (!(tau >= 0.0)) throw std::invalid_argument("ThresholdSpec: tau must be >= 0");
    return {Kind::RelativeIncrease, tau};
}

ThresholdSpec ThresholdSpec::relative_fraction(double alpha_frac) {
    if (!(alpha_frac > 0.0 && alpha_frac <= 1.0))
        throw std::invalid_argument("ThresholdSpec: alpha must lie in (0,1]");
    return {Kind::RelativeFraction, alpha_frac};
}

bool ThresholdSpec::met(double eval, double baseline) const {
    switch (kind) {
        case Kind::RelativeIncrease: return eval <= (1.0 + value) * baseline;
        case Kind::RelativeFraction: return std::exp(-eval) >= value * std::exp(-baseline);
    }
    return false;
}

std::optional<int> steps_to_reconverge(const MetricsLog& log, int task_id, int transition_step,
                                       const ThresholdSpec& thr) {
    const auto& recs = log.records;
    auto it = std::find_if(recs.begin(), recs.end(), [&](const MetricsRecord& r) { return r.step == transition_step; });
    if (it == recs.end() || it + 1 == recs.end() || (it + 1)->task_in_training == it->task_in_training) {
        throw std::invalid_argument("steps_to_reconverge: step " + std::to_string(transition_step) +
                                    " is not a task transition");
    }
    if (!it->per_task_eval.contains(task_id))
        throw std::invalid_argument("steps_to_reconverge: task " + std::to_string(task_id) +
                                    " not seen before the transition");
    const double baseline = first_learning_baseline(log, task_id);
    const int window_task = (it + 1)->task_in_training;
    for (auto r = it + 1; r != recs.end() && r->task_in_training == window_task; ++r) {
        if (thr.met(r->per_task_eval.at(task_id), baseline)) return r->step - transition_step;
    }
    return std::nullopt;
}

}  // namespace trcl
