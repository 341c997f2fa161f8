#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "support/oracles.hpp"
#include "trcl/diffusion.hpp"
#include "trcl/replay.hpp"

using namespace trcl;

namespace {

Batch indexed_batch(std::size_t n) {
    Batch b;
    for (std::size_t i = 0; i < n; ++i) b.push_back({Vector{static_cast<double>(i)}, std::nullopt});
    return b;
}

}  // namespace

TEST(ReplayBuffer, KeepsAtMostCapacity) {
    ReplayBuffer buf(10);
    buf.store(1, indexed_batch(100), 0);
    buf.store(2, indexed_batch(4), 0);
    EXPECT_EQ(buf.samples(1).size(), 10u);
    EXPECT_EQ(buf.samples(2).size(), 4u);
    EXPECT_EQ(buf.task_count(), 2u);
    EXPECT_THROW(ReplayBuffer(0), std::invalid_argument);
}

TEST(ReplayBuffer, ReservoirIsDeterministicAndHasNoDuplicates) {
    ReplayBuffer a(16);
    ReplayBuffer b(16);
    a.store(3, indexed_batch(500), 42);
    b.store(3, indexed_batch(500), 42);
    EXPECT_EQ(a.samples(3), b.samples(3));
    std::map<double, int> seen;
    for (const Sample& s : a.samples(3)) ++seen[s.input[0]];
    EXPECT_EQ(seen.size(), 16u);
}

TEST(ReplayBuffer, ReservoirInclusionIsUniform) {
    const std::size_t n = 50;
    const std::size_t k = 10;
    const int trials = 4000;
    std::vector<int> hits(n, 0);
    for (int s = 0; s < trials; ++s) {
        ReplayBuffer buf(k);
        buf.store(1, indexed_batch(n), static_cast<std::uint64_t>(s));
        for (const Sample& x : buf.samples(1)) ++hits[static_cast<std::size_t>(x.input[0])];
    }
    const double p = static_cast<double>(k) / n;
    const double se = std::sqrt(p * (1 - p) / trials);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(hits[i] / static_cast<double>(trials), p, 5 * se) << i;
}

TEST(ReplayBuffer, StoringAgainReplaces) {
    ReplayBuffer buf(5);
    buf.store(1, indexed_batch(5), 0);
    Batch other{{Vector{-1.0}, std::nullopt}};
    buf.store(1, other, 0);
    EXPECT_EQ(buf.samples(1), other);
}

TEST(ReplayBuffer, UnknownTaskThrows) {
    ReplayBuffer buf(5);
    EXPECT_THROW((void)buf.samples(7), UnknownTaskError);
    EXPECT_THROW(sample_replay_batch(buf, 7, 3, 0), UnknownTaskError);
}

TEST(SampleReplayBatch, DrawsFromStoredSamplesDeterministically) {
    ReplayBuffer buf(8);
    buf.store(1, indexed_batch(8), 0);
    const Batch a = sample_replay_batch(buf, 1, 100, 9);
    EXPECT_EQ(a.size(), 100u);
    EXPECT_EQ(a, sample_replay_batch(buf, 1, 100, 9));
    EXPECT_NE(a, sample_replay_batch(buf, 1, 100, 10));
    for (const Sample& s : a) {
        EXPECT_GE(s.input[0], 0.0);
        EXPECT_LT(s.input[0], 8.0);
    }
    EXPECT_THROW(sample_replay_batch(buf, 1, 0, 9), std::invalid_argument);
}

TEST(GenerativeReplay, SnapshotIsADeepCopy) {
    GenerativeReplaySource src;
    Params p{1.0, 2.0};
    src.snapshot_generator(1, ModelSpec::gaussian_mean(2), p);
    p[0] = 100.0;
    EXPECT_EQ(src.snapshot(1).params, (Params{1.0, 2.0}));
}

TEST(GenerativeReplay, RejectsDuplicatesAndNonGenerativeFamilies) {
    GenerativeReplaySource src;
    src.snapshot_generator(1, ModelSpec::gaussian_mean(2), Params{0, 0});
    EXPECT_THROW(src.snapshot_generator(1, ModelSpec::gaussian_mean(2), Params{0, 0}), std::invalid_argument);
    const ModelSpec mlp = ModelSpec::mlp({1, 2, 1});
    EXPECT_THROW(src.snapshot_generator(2, mlp, Params(mlp.param_dim())), std::invalid_argument);
    EXPECT_THROW((void)src.snapshot(9), UnknownTaskError);
}

TEST(GenerativeReplay, GaussianMeanDrawsStandardNormalAroundTheMean) {
    GenerativeReplaySource src;
    const Params mu{2.0, -1.0, 0.5};
    src.snapshot_generator(4, ModelSpec::gaussian_mean(3), mu);
    const Batch b = sample_replay_batch(src, 4, 50000, 3);
    std::vector<Vector> xs;
    for (const Sample& s : b) xs.push_back(s.input);
    const oracle::Moments m = oracle::moments(xs);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NEAR(m.mean[k], mu[k], 4.0 / std::sqrt(50000.0));
        EXPECT_NEAR(m.var[k], 1.0, 0.03);
    }
    EXPECT_EQ(b, sample_replay_batch(src, 4, 50000, 3));
}

TEST(GenerativeReplay, AttachesTargets) {
    GenerativeReplaySource src;
    src.snapshot_generator(1, ModelSpec::gaussian_mean(1), Params{0.0},
                           [](const Vector& x) { return Vector{2.0 * x[0]}; });
    for (const Sample& s : sample_replay_batch(src, 1, 20, 0)) {
        ASSERT_TRUE(s.target.has_value());
        EXPECT_EQ((*s.target)[0], 2.0 * s.input[0]);
    }
    src.snapshot_generator(2, ModelSpec::gaussian_mean(1), Params{0.0});
    for (const Sample& s : sample_replay_batch(src, 2, 5, 0)) EXPECT_FALSE(s.target.has_value());
}

TEST(GenerativeReplay, DiffusionSnapshotUsesTheReverseChain) {
    GenerativeReplaySource src;
    const ModelSpec spec = ModelSpec::toy_diffusion_default(2);
    const Params p = init_params(spec, 5);
    src.snapshot_generator(1, spec, p);
    const Batch b = sample_replay_batch(src, 1, 6, 8);
    ASSERT_EQ(b.size(), 6u);
    for (const Sample& s : b) EXPECT_EQ(s.input.size(), 2u);
    EXPECT_EQ(b, sample_replay_batch(src, 1, 6, 8));
}
