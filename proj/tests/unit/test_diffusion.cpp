#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "trcl/diffusion.hpp"
#include "trcl/rng.hpp"

using namespace trcl;

TEST(DiffusionForward, HandComputedValues) {
    EXPECT_EQ(forward_marginal({1.5, -2}, 1.0, {9, 9}), (Vector{1.5, -2}));
    EXPECT_EQ(forward_marginal({1.5, -2}, 0.0, {0.3, 0.7}), (Vector{0.3, 0.7}));
    const Vector x = forward_marginal({2, 0}, 0.25, {0, 2});
    EXPECT_DOUBLE_EQ(x[0], 1.0);
    EXPECT_DOUBLE_EQ(x[1], std::sqrt(3.0));
}

TEST(DiffusionForward, RejectsOutOfRangeTimestep) {
    const NoiseSchedule s = NoiseSchedule::linear(8, 1e-3, 0.1);
    EXPECT_THROW(diffusion_forward({0, 0}, 0, {0, 0}, s), std::out_of_range);
    EXPECT_THROW(diffusion_forward({0, 0}, 9, {0, 0}, s), std::out_of_range);
    EXPECT_NO_THROW(diffusion_forward({0, 0}, 8, {0, 0}, s));
}

TEST(DiffusionForward, MonteCarloMomentsMatchClosedForm) {
    const NoiseSchedule s = NoiseSchedule::linear(32, 1e-4, 0.2);
    const Vector x0{1.5, -0.5};
    for (int t : {1, 16, 32}) {
        auto gen = keyed_engine({5, static_cast<std::uint64_t>(t)});
        std::vector<Vector> xs;
        for (int i = 0; i < 100000; ++i) xs.push_back(diffusion_forward(x0, t, standard_normal(gen, 2), s));
        const oracle::Moments m = oracle::moments(xs);
        const double ab = s.alpha_bar(t);
        for (std::size_t k = 0; k < 2; ++k) {
            const double se = std::sqrt((1 - ab) / 1e5);
            EXPECT_LE(std::abs(m.mean[k] - std::sqrt(ab) * x0[k]), 4 * se) << "t=" << t;
            EXPECT_LE(std::abs(m.var[k] - (1 - ab)), 0.05 * (1 - ab)) << "t=" << t;
        }
    }
}

TEST(DiffusionDraw, DeterministicPerIndex) {
    const DiffusionDraw a = diffusion_draw(3, 7, 2, 32);
    const DiffusionDraw b = diffusion_draw(3, 7, 2, 32);
    EXPECT_EQ(a.t, b.t);
    EXPECT_EQ(a.eps, b.eps);
    int lo = 100;
    int hi = 0;
    for (std::size_t i = 0; i < 2000; ++i) {
        const int t = diffusion_draw(1, i, 2, 32).t;
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    EXPECT_EQ(lo, 1);
    EXPECT_EQ(hi, 32);
}

TEST(TimestepFeatures, BoundedSinusoids) {
    const Vector f = timestep_features(8, 32);
    ASSERT_EQ(f.size(), kTimeFeatures);
    for (std::size_t k = 0; k < kTimeFeatures / 2; ++k) {
        EXPECT_NEAR(f[2 * k] * f[2 * k] + f[2 * k + 1] * f[2 * k + 1], 1.0, 1e-15);
    }
}

TEST(AncestralSample, ZeroPredictorMatchesAnalyticChain) {
    const NoiseSchedule s = NoiseSchedule::linear(32, 1e-4, 0.2);
    const NoisePredictor zero = [](const Vector& x, int) { return Vector(x.size()); };
    const auto xs = ancestral_sample(s, 2, 10000, 4, zero);
    // With eps_hat = 0: x_{t-1} = x_t / sqrt(alpha_t) + sqrt(beta_t) z, so the
    // variance recursion is v_{t-1} = v_t / alpha_t + beta_t (no noise at t = 1).
    double v = 1.0;
    for (int t = s.steps; t >= 1; --t) v = v / s.alpha(t) + (t > 1 ? s.beta(t) : 0.0);
    const oracle::Moments m = oracle::moments(xs);
    for (std::size_t k = 0; k < 2; ++k) {
        EXPECT_LE(std::abs(m.mean[k]), 3.0 * std::sqrt(v / 1e4));
        EXPECT_NEAR(m.var[k], v, 0.05 * v);
    }
}

TEST(AncestralSample, SingleStepScheduleAppliesOneUpdate) {
    const NoiseSchedule s = NoiseSchedule::from_betas({0.3});
    const NoisePredictor half = [](const Vector& x, int) { return 0.5 * x; };
    const auto xs = ancestral_sample(s, 3, 4, 9, half);
    for (std::size_t j = 0; j < xs.size(); ++j) {
        auto gen = keyed_engine({9, tag(Stream::DiffusionInit), j});
        const Vector xT = standard_normal(gen, 3);
        const double coef = 0.3 / std::sqrt(1 - s.alpha_bar(1));
        const Vector expect = (1.0 / std::sqrt(0.7)) * (xT - coef * (0.5 * xT));
        EXPECT_LE(norm2(xs[j] - expect), 1e-14);
    }
}

TEST(DiffusionSample, DeterministicAndFamilyChecked) {
    const ModelSpec spec = ModelSpec::toy_diffusion_default(2);
    const Params p = init_params(spec, 1);
    EXPECT_EQ(diffusion_sample(spec, p, 5, 3), diffusion_sample(spec, p, 5, 3));
    EXPECT_THROW(diffusion_sample(ModelSpec::gaussian_mean(2), Params(2), 1, 0), std::invalid_argument);
}

TEST(DiffusionSample, TrainedOnSinglePointConcentratesThere) {
    const ModelSpec spec = ModelSpec::toy_diffusion(2, {16, 16}, NoiseSchedule::linear(32, 1e-4, 0.2));
    const Batch data(64, Sample{{3, 3}, std::nullopt});
    Params trained = oracle::adam_train(spec, init_params(spec, 0), data, 8000, 3e-3, 1, 64);
    trained = oracle::adam_train(spec, trained, data, 4000, 5e-4, 2, 64);
    // Fresh draws for the held-out loss.
    const double final_loss = loss(spec, trained, Batch(512, Sample{{3, 3}, std::nullopt}), 424242);
    ASSERT_LT(final_loss, 0.05);
    const oracle::Moments m = oracle::moments(diffusion_sample(spec, trained, 2000, 11));
    EXPECT_NEAR(m.mean[0], 3.0, 0.5);
    EXPECT_NEAR(m.mean[1], 3.0, 0.5);
}
