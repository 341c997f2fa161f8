#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "trcl/config.hpp"
#include "trcl/metrics.hpp"
#include "trcl/trainer.hpp"

namespace trcl {

class ExportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExportFormat { Csv, Json };

/// `step,task_in_training,task_id,eval_loss`, one row per task per record.
std::string metrics_csv(const MetricsLog& log);
std::string metrics_json(const MetricsLog& log);

/// Writes the log in the requested format. Throws ExportError naming the path.
void export_results(const MetricsLog& log, const std::filesystem::path& path, ExportFormat format);

/// Sidecar metadata: full config, seed, library version, divergence state
/// and per-anchor diagnostics.
std::string run_metadata_json(const ExperimentConfig& cfg, const RunResult& result);

/// All seeds of one configuration.
struct RunGroup {
    std::string label;
    ExperimentConfig config;
    std::vector<RunResult> runs;
};

/// Forgetting and steps-to-reconverge tables keyed (method, task, threshold).
std::string summary_json(const std::vector<RunGroup>& groups);

void write_text_file(const std::filesystem::path& path, const std::string& text);

const char* library_version();

}  // namespace trcl
