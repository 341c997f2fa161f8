#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "trcl/task_stream.hpp"
#include "trcl/trainer.hpp"

namespace trcl {

/// Malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One experiment: a task stream plus a run configuration. JSON keys mirror
/// the C++ field names:
///
///   { "stream": { "family", "n_tasks", "heterogeneity", "seed", ... },
///     "run": { "method", "model": {...}, "continual": {...}, "meta": {...},
///              "eval_interval", "seeds", "replay", "buffer_capacity" },
///     "thresholds": { "tau": [...], "alpha": [...] } }
struct ExperimentConfig {
    TaskStreamSpec stream;
    RunConfig run;
    std::vector<double> taus{0.1, 0.2, 0.3};
    std::vector<double> alphas{0.99, 0.9, 0.8};
};

ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// Canonical JSON (sorted keys, every field present).
std::string to_json(const ExperimentConfig& cfg);

struct ExperimentVariant {
    std::string label;
    /// Dotted config path -> JSON value text, e.g. "run.continual.lambda" -> "10".
    std::map<std::string, std::string> assignments;
    ExperimentConfig config;
};

/// Cartesian product of a grid file {"run.method": ["Ewc", "Replay"], ...}
/// applied to a base config, in sorted-key order.
std::vector<ExperimentVariant> expand_grid(std::string_view base_json, std::string_view grid_json);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace trcl
