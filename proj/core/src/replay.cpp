#include "trcl/replay.hpp"

#include <string>

#include "trcl/diffusion.hpp"
#include "trcl/rng.hpp"

namespace trcl {

ReplayBuffer::ReplayBuffer(std::size_t capacity_per_task) : capacity_(capacity_per_task) {
    if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::store(int task_id, std::span<const Sample> samples, std::uint64_t seed) {
    auto gen = keyed_engine({seed, tag(Stream::Reservoir), static_cast<std::uint64_t>(task_id)});
    Batch reservoir;
    reservoir.reserve(std::min(capacity_, samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i < capacity_) {
            reservoir.push_back(samples[i]);
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, i);
            const std::size_t j = pick(gen);
            if (j < capacity_) reservoir[j] = samples[i];
        }
    }
    per_task_[task_id] = std::move(reservoir);
}

const Batch& ReplayBuffer::samples(int task_id) const {
    auto it = per_task_.find(task_id);
    if (it == per_task_.end()) throw UnknownTaskError("replay buffer: unknown task " + std::to_string(task_id));
    return it->second;
}

void GenerativeReplaySource::snapshot_generator(int task_id, const ModelSpec& spec, const Params& params,
                                                TargetFn target) {
    if (per_task_.contains(task_id))
        throw std::invalid_argument("generative replay: task " + std::to_string(task_id) + " already registered");
    if (spec.family != ModelFamily::GaussianMean && spec.family != ModelFamily::ToyDiffusion)
        throw std::invalid_argument("generative replay: family " + to_string(spec.family) + " cannot generate");
    if (params.size() != spec.param_dim()) throw DimensionError("generative replay: params dimension");
    per_task_.emplace(task_id, GeneratorSnapshot{spec, Params(params), std::move(target)});
}

const GeneratorSnapshot& GenerativeReplaySource::snapshot(int task_id) const {
    auto it = per_task_.find(task_id);
    if (it == per_task_.end())
        throw UnknownTaskError("generative replay: unknown task " + std::to_string(task_id));
    return it->second;
}

Batch sample_replay_batch(const ReplayBuffer& buffer, int task_id, std::size_t n, std::uint64_t rng_seed) {
    if (n == 0) throw std::invalid_argument("sample_replay_batch: n must be >= 1");
    const Batch& stored = buffer.samples(task_id);
    if (stored.empty()) return {};
    auto gen = keyed_engine({rng_seed, tag(Stream::Replay), static_cast<std::uint64_t>(task_id)});
    std::uniform_int_distribution<std::size_t> pick(0, stored.size() - 1);
    Batch out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(stored[pick(gen)]);
    return out;
}

Batch sample_replay_batch(const GenerativeReplaySource& source, int task_id, std::size_t n,
                          std::uint64_t rng_seed) {
    if (n == 0) throw std::invalid_argument("sample_replay_batch: n must be >= 1");
    const GeneratorSnapshot& snap = source.snapshot(task_id);
    std::vector<Vector> inputs;
    const std::uint64_t key = rng_seed ^ (static_cast<std::uint64_t>(task_id) * 0x2545f4914f6cdd1dull);
    if (snap.spec.family == ModelFamily::GaussianMean) {
        auto gen = keyed_engine({key, tag(Stream::Replay)});
        inputs.reserve(n);
        for (std::size_t i = 0; i < n; ++i) inputs.push_back(snap.params + standard_normal(gen, snap.params.size()));
    } else {
        inputs = diffusion_sample(snap.spec, snap.params, n, key);
    }
    Batch out;
    out.reserve(n);
    for (Vector& x : inputs) {
        Sample s{std::move(x), std::nullopt};
        if (snap.target) s.target = snap.target(s.input);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace trcl
