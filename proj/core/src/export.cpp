#include "trcl/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#ifndef TRCL_VERSION_STRING
#define TRCL_VERSION_STRING "0.0.0"
#endif

namespace trcl {

namespace {

using nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double standard_error(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

/// Median where absent counts as +inf; absent result if the median is infinite.
ordered_json median_steps(std::vector<std::optional<int>> values) {
    std::vector<double> xs;
    for (const auto& v : values) xs.push_back(v ? *v : std::numeric_limits<double>::infinity());
    std::sort(xs.begin(), xs.end());
    if (xs.empty()) return nullptr;
    const std::size_t n = xs.size();
    const double m = n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
    if (!std::isfinite(m)) return nullptr;
    return m;
}

std::vector<ThresholdSpec> thresholds_of(const ExperimentConfig& cfg) {
    std::vector<ThresholdSpec> out;
    for (double t : cfg.taus) out.push_back(ThresholdSpec::relative_increase(t));
    for (double a : cfg.alphas) out.push_back(ThresholdSpec::relative_fraction(a));
    return out;
}

std::string threshold_label(const ThresholdSpec& t) {
    return (t.kind == ThresholdSpec::Kind::RelativeIncrease ? "tau=" : "alpha=") + format_double(t.value);
}

}  // namespace

const char* library_version() { return TRCL_VERSION_STRING; }

std::string metrics_csv(const MetricsLog& log) {
    std::string out = "step,task_in_training,task_id,eval_loss\n";
    for (const MetricsRecord& r : log.records) {
        for (const auto& [task, value] : r.per_task_eval) {
            out += std::to_string(r.step) + ',' + std::to_string(r.task_in_training) + ',' + std::to_string(task) +
                   ',' + format_double(value) + '\n';
        }
    }
    return out;
}

std::string metrics_json(const MetricsLog& log) {
    ordered_json j;
    j["diverged"] = log.diverged;
    ordered_json rows = ordered_json::array();
    for (const MetricsRecord& r : log.records) {
        ordered_json evals = ordered_json::object();
        for (const auto& [task, value] : r.per_task_eval) evals[std::to_string(task)] = value;
        rows.push_back({{"step", r.step}, {"task_in_training", r.task_in_training}, {"per_task_eval", evals}});
    }
    j["records"] = std::move(rows);
    return j.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ExportError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw ExportError("write failed for " + path.string());
}

void export_results(const MetricsLog& log, const std::filesystem::path& path, ExportFormat format) {
    write_text_file(path, format == ExportFormat::Csv ? metrics_csv(log) : metrics_json(log));
}

std::string run_metadata_json(const ExperimentConfig& cfg, const RunResult& result) {
    ordered_json j;
    j["library_version"] = library_version();
    j["seed"] = result.seed;
    j["config"] = nlohmann::json::parse(to_json(cfg));
    j["diverged"] = result.log.diverged;
    j["divergence_reason"] = result.divergence_reason;
    j["n_records"] = result.log.records.size();
    j["replay_registrations"] = result.replay_registrations;
    ordered_json anchors = ordered_json::array();
    for (const AnchorInfo& a : result.anchors) {
        anchors.push_back({{"task_id", a.task_id},
                           {"curvature_scale", a.rho},
                           {"degenerate", a.degenerate},
                           {"collinearity", a.collinearity}});
    }
    j["anchors"] = std::move(anchors);
    if (!result.feasible.empty()) {
        const auto n_ok = std::count(result.feasible.begin(), result.feasible.end(), true);
        j["trust_region_feasible_fraction"] =
            static_cast<double>(n_ok) / static_cast<double>(result.feasible.size());
    }
    return j.dump(2) + "\n";
}

std::string summary_json(const std::vector<RunGroup>& groups) {
    ordered_json forgetting = ordered_json::array();
    ordered_json final_eval = ordered_json::array();
    ordered_json reconverge = ordered_json::array();

    for (const RunGroup& g : groups) {
        const std::string method = to_string(g.config.run.method);
        std::vector<const RunResult*> complete;
        for (const RunResult& r : g.runs) {
            if (!r.log.diverged && !r.log.records.empty()) complete.push_back(&r);
        }
        std::map<int, std::vector<double>> per_task;
        std::vector<double> averages;
        std::vector<double> final_means;
        for (const RunResult* r : complete) {
            const ForgettingReport rep = compute_forgetting(r->log);
            for (const auto& [task, f] : rep.per_task) per_task[task].push_back(f);
            averages.push_back(rep.average);
            const auto& last = r->log.records.back().per_task_eval;
            double s = 0.0;
            for (const auto& [_, v] : last) s += v;
            final_means.push_back(s / static_cast<double>(last.size()));
        }
        // Diverged seeds are left out; n_seeds says how many remain.
        auto row = [&](ordered_json task, const std::vector<double>& xs) {
            return ordered_json{{"label", g.label},
                                {"method", method},
                                {"task", std::move(task)},
                                {"mean", xs.empty() ? ordered_json(nullptr) : ordered_json(mean(xs))},
                                {"stderr", xs.empty() ? ordered_json(nullptr) : ordered_json(standard_error(xs))},
                                {"n_seeds", xs.size()},
                                {"per_seed", xs}};
        };
        for (const auto& [task, xs] : per_task) forgetting.push_back(row(task, xs));
        forgetting.push_back(row("average", averages));
        final_eval.push_back(row("average", final_means));

        if (complete.empty()) continue;
        const MetricsLog& ref = complete.front()->log;
        const std::vector<int> transitions = transition_steps(ref);
        for (const ThresholdSpec& thr : thresholds_of(g.config)) {
            for (const auto& [task, _] : per_task) {
                for (int ts : transitions) {
                    // Only transitions after the task was first trained.
                    std::vector<std::optional<int>> values;
                    bool applicable = true;
                    for (const RunResult* r : complete) {
                        const auto it = std::find_if(r->log.records.begin(), r->log.records.end(),
                                                     [&](const MetricsRecord& rec) { return rec.step == ts; });
                        if (it == r->log.records.end() || it->task_in_training < task) {
                            applicable = false;
                            break;
                        }
                        values.push_back(steps_to_reconverge(r->log, task, ts, thr));
                    }
                    if (!applicable) continue;
                    ordered_json per_seed = ordered_json::array();
                    for (const auto& v : values) per_seed.push_back(v ? ordered_json(*v) : ordered_json(nullptr));
                    reconverge.push_back({{"label", g.label},
                                          {"method", method},
                                          {"task", task},
                                          {"threshold", threshold_label(thr)},
                                          {"transition_step", ts},
                                          {"median", median_steps(values)},
                                          {"per_seed", std::move(per_seed)}});
                }
            }
        }
    }

    ordered_json j;
    j["library_version"] = library_version();
    j["forgetting"] = std::move(forgetting);
    j["final_average_eval"] = std::move(final_eval);
    j["steps_to_reconverge"] = std::move(reconverge);
    return j.dump(2) + "\n";
}

}  // namespace trcl
