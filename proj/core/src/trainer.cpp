#include "trcl/trainer.hpp"

#include <cmath>
#include <stdexcept>
#include <variant>

#include "trcl/replay.hpp"
#include "trcl/rng.hpp"

namespace trcl {

namespace {

std::uint64_t step_seed(std::uint64_t seed, std::uint64_t step) {
    return seed * 0x100000001b3ull + step * 0x9e3779b97f4a7c15ull + 1;
}

Batch draw_batch(const Batch& train, std::size_t n, std::uint64_t seed, std::uint64_t step) {
    auto gen = keyed_engine({seed, tag(Stream::Batch), step});
    std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
    Batch out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(train[pick(gen)]);
    return out;
}

double curvature_scale(const Curvature& c) {
    if (const auto* r = std::get_if<RankOneCurvature>(&c.representation())) return r->rho;
    const Matrix m = c.to_matrix();
    double tr = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) tr += m(i, i);
    return tr;
}

/// Stored-sample or generative replay, chosen per run.
class ReplayStore {
public:
    ReplayStore(ReplayKind kind, std::size_t capacity) : kind_(kind), buffer_(capacity) {}

    void register_task(const TaskDataset& task, const ModelSpec& model, const Params& theta,
                       const TaskStreamSpec& stream_spec, std::uint64_t seed) {
        if (kind_ == ReplayKind::Buffer) {
            buffer_.store(task.task_id, task.train, seed);
            return;
        }
        if (model.family == ModelFamily::GaussianMean || model.family == ModelFamily::ToyDiffusion) {
            generative_.snapshot_generator(task.task_id, model, theta, task_target(stream_spec, task.task_id));
            return;
        }
        // Supervised models cannot generate inputs: fit a unit Gaussian to the
        // task inputs and label generated inputs with the task's target function.
        Vector mean(task.train.front().input.size());
        for (const Sample& s : task.train) mean += s.input;
        mean *= 1.0 / static_cast<double>(task.train.size());
        generative_.snapshot_generator(task.task_id, ModelSpec::gaussian_mean(mean.size()), mean,
                                       task_target(stream_spec, task.task_id));
    }

    [[nodiscard]] Batch draw(int task_id, std::size_t n, std::uint64_t seed) const {
        return kind_ == ReplayKind::Buffer ? sample_replay_batch(buffer_, task_id, n, seed)
                                           : sample_replay_batch(generative_, task_id, n, seed);
    }

private:
    ReplayKind kind_;
    ReplayBuffer buffer_;
    GenerativeReplaySource generative_;
};

}  // namespace

std::string to_string(Method m) {
    switch (m) {
        case Method::Finetune: return "Finetune";
        case Method::Ewc: return "Ewc";
        case Method::Replay: return "Replay";
        case Method::TrustRegion: return "TrustRegion";
        case Method::Ftml: return "Ftml";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    if (name == "Finetune") return Method::Finetune;
    if (name == "Ewc") return Method::Ewc;
    if (name == "Replay") return Method::Replay;
    if (name == "TrustRegion") return Method::TrustRegion;
    if (name == "Ftml") return Method::Ftml;
    throw std::invalid_argument("unknown method: " + name);
}

std::string to_string(ReplayKind k) { return k == ReplayKind::Buffer ? "buffer" : "generative"; }

ReplayKind parse_replay_kind(const std::string& name) {
    if (name == "buffer") return ReplayKind::Buffer;
    if (name == "generative") return ReplayKind::Generative;
    throw std::invalid_argument("unknown replay kind: " + name);
}

bool uses_anchors(Method m) { return m == Method::Ewc || m == Method::TrustRegion; }
bool uses_replay(Method m) { return m == Method::Replay || m == Method::TrustRegion || m == Method::Ftml; }

void RunConfig::validate() const {
    model.validate();
    continual.validate();
    if (meta.has_value() != (method == Method::Ftml))
        throw std::invalid_argument("RunConfig: meta must be present iff method is Ftml");
    if (meta) meta->validate();
    if (eval_interval <= 0) throw std::invalid_argument("RunConfig: eval_interval must be > 0");
    if (seeds.empty()) throw std::invalid_argument("RunConfig: at least one seed required");
    if (buffer_capacity == 0) throw std::invalid_argument("RunConfig: buffer_capacity must be > 0");
}

RunResult run_continual(const std::vector<TaskDataset>& stream, const TaskStreamSpec& stream_spec,
                        const RunConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (stream.empty()) throw std::invalid_argument("run_continual: empty stream");

    RunResult result;
    result.seed = seed;
    Params theta = init_params(cfg.model, seed);
    std::vector<TaskAnchor> anchors;
    ReplayStore replay(cfg.replay, cfg.buffer_capacity);
    std::vector<int> replay_tasks;

    const std::size_t batch_size = static_cast<std::size_t>(cfg.continual.batch_size);
    const bool anchored = uses_anchors(cfg.method);
    const bool replaying = uses_replay(cfg.method);
    const std::span<const TaskAnchor> no_anchors;
    const std::span<const ReplayBatch> no_replay;

    auto evaluate = [&](int step, int task_id) {
        MetricsRecord rec{step, task_id, {}};
        for (const TaskDataset& t : stream) {
            if (t.task_id > task_id) break;
            rec.per_task_eval[t.task_id] = loss(cfg.model, theta, t.eval, kEvalSeed);
        }
        for (const auto& [id, value] : rec.per_task_eval) {
            if (!std::isfinite(value)) {
                result.divergence_reason = "non-finite eval loss for task " + std::to_string(id);
                return false;
            }
        }
        if (cfg.continual.trust_radius && !anchors.empty())
            result.feasible.push_back(trust_region_feasible(theta, anchors, *cfg.continual.trust_radius));
        result.log.records.push_back(std::move(rec));
        return true;
    };

    int step = 0;
    for (const TaskDataset& task : stream) {
        if (task.train.empty()) throw std::invalid_argument("run_continual: task without training data");
        for (int k = 1; k <= cfg.continual.steps_per_task; ++k) {
            ++step;
            const std::uint64_t sseed = step_seed(seed, static_cast<std::uint64_t>(step));
            const Batch batch = draw_batch(task.train, batch_size, seed, static_cast<std::uint64_t>(step));
            double step_loss = 0.0;

            if (cfg.method == Method::Ftml) {
                std::vector<MetaTaskSource> seen;
                for (int id : replay_tasks) {
                    seen.push_back({id, [&, id](std::uint64_t s) { return replay.draw(id, batch_size, s); }});
                }
                const MetaTaskSource current{task.task_id, [&](std::uint64_t) { return batch; }};
                FtmlResult r = ftml_step(cfg.model, theta, seen, current, *cfg.meta, sseed);
                theta = std::move(r.update.theta);
                step_loss = loss(cfg.model, theta, batch, sseed);
            } else {
                std::vector<ReplayBatch> replay_batches;
                if (replaying && cfg.continual.beta != 0.0) {
                    for (std::size_t i = 0; i < replay_tasks.size(); ++i) {
                        replay_batches.push_back(
                            {replay_tasks[i], replay.draw(replay_tasks[i], batch_size, replay_seed(sseed, i))});
                    }
                }
                StepResult r = trust_region_step(cfg.model, theta, batch,
                                                 replaying ? std::span<const ReplayBatch>(replay_batches) : no_replay,
                                                 anchored ? std::span<const TaskAnchor>(anchors) : no_anchors,
                                                 cfg.continual, sseed);
                theta = std::move(r.theta);
                step_loss = r.current_loss;
            }

            if (!std::isfinite(step_loss) || !theta.all_finite()) {
                result.divergence_reason = "non-finite training loss at step " + std::to_string(step);
                result.log.diverged = true;
                result.final_params = theta;
                return result;
            }
            if (step % cfg.eval_interval == 0 || k == cfg.continual.steps_per_task) {
                if (!evaluate(step, task.task_id)) {
                    result.log.diverged = true;
                    result.final_params = theta;
                    return result;
                }
            }
        }

        const std::uint64_t boundary_seed = step_seed(seed, static_cast<std::uint64_t>(step)) ^ 0xb0u;
        if (anchored) {
            FisherEstimate est = empirical_fisher(cfg.model, theta, task.train, cfg.continual.fisher_mode, boundary_seed);
            result.anchors.push_back({task.task_id, curvature_scale(est.curvature), est.degenerate, est.collinearity});
            anchors.emplace_back(task.task_id, theta, std::move(est.curvature), est.degenerate);
        }
        if (replaying) {
            replay.register_task(task, cfg.model, theta, stream_spec, seed);
            replay_tasks.push_back(task.task_id);
            ++result.replay_registrations;
        }
    }
    result.final_params = std::move(theta);
    return result;
}

}  // namespace trcl
