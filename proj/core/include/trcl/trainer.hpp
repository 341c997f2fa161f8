#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trcl/continual.hpp"
#include "trcl/meta.hpp"
#include "trcl/metrics.hpp"
#include "trcl/models.hpp"
#include "trcl/task_stream.hpp"

namespace trcl {

enum class Method { Finetune, Ewc, Replay, TrustRegion, Ftml };
enum class ReplayKind { Buffer, Generative };

std::string to_string(Method m);
Method parse_method(const std::string& name);
std::string to_string(ReplayKind k);
ReplayKind parse_replay_kind(const std::string& name);

bool uses_anchors(Method m);
bool uses_replay(Method m);

struct RunConfig {
    Method method = Method::TrustRegion;
    ModelSpec model;
    ContinualConfig continual;
    /// Present iff method == Ftml.
    std::optional<MetaConfig> meta;
    int eval_interval = 10;
    std::vector<std::uint64_t> seeds{0};
    ReplayKind replay = ReplayKind::Buffer;
    std::size_t buffer_capacity = 1300;

    void validate() const;
};

/// Per-boundary diagnostics.
struct AnchorInfo {
    int task_id = 0;
    double rho = 0.0;  ///< RankOne rho, or the trace for Full/Diagonal
    bool degenerate = false;
    double collinearity = 0.0;
};

struct RunResult {
    MetricsLog log;
    std::uint64_t seed = 0;
    Params final_params;
    std::vector<AnchorInfo> anchors;
    std::size_t replay_registrations = 0;
    /// Whether the iterate satisfied the trust region (when trust_radius is
    /// set) at each logged record; empty otherwise.
    std::vector<bool> feasible;
    std::string divergence_reason;
};

/// Trains steps_per_task updates per task in stream order, evaluates every
/// seen task on its eval split every eval_interval steps (and at each task
/// end), and registers anchors / replay sources at each task boundary.
/// Stops early on a non-finite loss with log.diverged set.
RunResult run_continual(const std::vector<TaskDataset>& stream, const TaskStreamSpec& stream_spec,
                        const RunConfig& cfg, std::uint64_t seed);

/// Seed used for held-out diffusion loss evaluation (fixed across steps).
inline constexpr std::uint64_t kEvalSeed = 0xe7a1;

}  // namespace trcl
