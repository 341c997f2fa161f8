#include <gtest/gtest.h>

#include <map>
#include <set>

#include "support/oracles.hpp"
#include "trcl/continual.hpp"
#include "trcl/meta.hpp"
#include "trcl/rng.hpp"
#include "trcl/verify.hpp"

using namespace trcl;

namespace {

MetaConfig exact_cfg(double alpha, double eta) {
    MetaConfig c;
    c.alpha = alpha;
    c.eta = eta;
    c.first_order = false;
    return c;
}

}  // namespace

TEST(SplitSupportQuery, EvenAndOddBatches) {
    const ModelSpec spec = ModelSpec::gaussian_mean(1);
    const SupportQuery even = split_support_query(random_batch(spec, 8, 1), 3);
    EXPECT_EQ(even.support.size(), 4u);
    EXPECT_EQ(even.query.size(), 4u);
    const SupportQuery odd = split_support_query(random_batch(spec, 7, 1), 3);
    EXPECT_EQ(odd.support.size(), 4u);
    EXPECT_EQ(odd.query.size(), 3u);
    EXPECT_THROW(split_support_query(random_batch(spec, 1, 1), 3), std::invalid_argument);
}

TEST(SplitSupportQuery, IsAPermutationAndDeterministic) {
    const ModelSpec spec = ModelSpec::gaussian_mean(1);
    const Batch batch = random_batch(spec, 9, 2);
    const SupportQuery a = split_support_query(batch, 5);
    const SupportQuery b = split_support_query(batch, 5);
    EXPECT_EQ(a.support, b.support);
    EXPECT_EQ(a.query, b.query);
    std::multiset<double> before;
    std::multiset<double> after;
    for (const Sample& s : batch) before.insert(s.input[0]);
    for (const Sample& s : a.support) after.insert(s.input[0]);
    for (const Sample& s : a.query) after.insert(s.input[0]);
    EXPECT_EQ(before, after);
}

TEST(MamlInnerStep, IsOneGradientStep) {
    const ModelSpec spec = ModelSpec::mlp({2, 3, 1});
    const Params theta = init_params(spec, 1);
    const Batch support = random_batch(spec, 5, 1);
    const Params adapted = maml_inner_step(spec, theta, support, 0.1, 7);
    EXPECT_EQ(adapted, theta - 0.1 * grad(spec, theta, support, 7));
}

TEST(MamlOuterUpdate, ExactMinusFirstOrderIsCurvatureCorrection) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ModelSpec spec = ModelSpec::mlp({2, 5, 1});
        ASSERT_LE(spec.param_dim(), 64u);
        const Params theta = init_params(spec, seed);
        const SupportQuery sq = split_support_query(random_batch(spec, 12, seed), seed);
        const MetaConfig cfg = exact_cfg(0.05, 0.1);
        const MamlUpdate exact = maml_outer_update_exact(spec, theta, sq, cfg, seed);
        MetaConfig fo_cfg = cfg;
        fo_cfg.first_order = true;
        const MamlUpdate fo = maml_outer_update_first_order(spec, theta, sq, fo_cfg, seed);
        EXPECT_EQ(exact.query_grad, fo.query_grad);
        const Vector expected = (cfg.eta * cfg.alpha) * (hessian(spec, theta, sq.support, seed) * fo.query_grad);
        EXPECT_LE(norm2((exact.theta - fo.theta) - expected), 1e-10 * std::max(norm2(expected), 1e-300));
    }
}

TEST(MamlOuterUpdate, FirstOrderHasNoCorrection) {
    const ModelSpec spec = ModelSpec::gaussian_mean(2);
    const SupportQuery sq = split_support_query(random_batch(spec, 4, 0), 0);
    MetaConfig cfg;
    const MamlUpdate fo = maml_outer_update_first_order(spec, Params{0, 0}, sq, cfg, 0);
    EXPECT_EQ(fo.correction, Vector(2));
    EXPECT_THROW(maml_outer_update_exact(spec, Params{0, 0}, SupportQuery{sq.support, {}}, cfg, 0),
                 std::invalid_argument);
}

// On L = rho/2 (u.(theta - c))^2 both updates stay on u: the old-task trust
// region step scales A delta by (beta + lambda) and the exact MAML step by
// (1 - alpha rho)^2. They coincide only when beta = (1 - alpha rho)^2 - alpha rho.
TEST(MamlOuterUpdate, RankOneQuadraticClosedForm) {
    const double rho = 1.3;
    const Curvature f = Curvature::rank_one_along(rho, {1, 2, -1});
    const ModelSpec spec = ModelSpec::quadratic_task(f);
    const Params center{0.1, 0.2, 0.3};
    const Params theta{0.5, -0.4, 0.9};
    const Batch data{{center, std::nullopt}};
    const MetaConfig cfg = exact_cfg(0.1, 0.5);
    const Vector a_delta = curvature_apply(f, theta - center);

    const MamlUpdate exact = maml_outer_update_exact(spec, theta, SupportQuery{data, data}, cfg, 0);
    const double s = (1 - cfg.alpha * rho) * (1 - cfg.alpha * rho);
    EXPECT_LE(norm2((exact.theta - theta) + (cfg.eta * s) * a_delta), 1e-13);

    const double lambda = cfg.alpha * rho;
    for (double beta : {1.0, s - lambda}) {
        const std::vector<ReplayBatch> replay{{1, data}};
        const std::vector<TaskAnchor> anchors{TaskAnchor(1, center, f)};
        const Vector dir = replay_grad_term(spec, theta, replay, beta, 0) + ewc_grad_term(theta, anchors, lambda);
        EXPECT_LE(norm2(dir - (beta + lambda) * a_delta), 1e-13);
    }
}

TEST(EquivalenceGap, ZeroWhenEvaluationPointsAndDataCoincide) {
    const ModelSpec spec = ModelSpec::mlp({2, 3, 1});
    const Params theta = init_params(spec, 2);
    const Batch data = random_batch(spec, 6, 2);
    const TaskAnchor anchor(1, theta, Curvature::diagonal(Vector(spec.param_dim(), 1.0)));
    MetaConfig cfg;
    cfg.alpha = 0.0;
    const EquivalenceGap g = equivalence_gap(spec, theta, anchor, data, SupportQuery{data, data}, cfg, 1.0);
    EXPECT_EQ(g.gap_I_B, 0.0);
    EXPECT_EQ(g.delta_norm, 0.0);
}

TEST(EquivalenceGap, ExactOnRankOneQuadratic) {
    auto gen = keyed_engine({3, 3});
    for (int trial = 0; trial < 20; ++trial) {
        const double rho = 0.5 + trial * 0.1;
        Vector u = standard_normal(gen, 6);
        const Curvature f = Curvature::rank_one_along(rho, u);
        const ModelSpec spec = ModelSpec::quadratic_task(f);
        const Params theta_star = standard_normal(gen, 6);
        const Params theta = theta_star + 0.2 * standard_normal(gen, 6);
        const Batch data{{theta_star, std::nullopt}};
        const MetaConfig cfg = exact_cfg(0.1, 0.1);
        const EquivalenceGap g = equivalence_gap(spec, theta, TaskAnchor(1, theta_star, f), data,
                                                 SupportQuery{data, data}, cfg, cfg.alpha * rho);
        EXPECT_LE(g.gap_II_C, 1e-10);
        EXPECT_NEAR(g.delta_norm, norm2(theta - theta_star), 1e-15);
    }
}

TEST(SampleTaskIndex, UniformOverTasks) {
    std::map<std::size_t, int> counts;
    const int n = 40000;
    for (int i = 0; i < n; ++i) ++counts[sample_task_index(4, static_cast<std::uint64_t>(i))];
    ASSERT_EQ(counts.size(), 4u);
    for (const auto& [idx, c] : counts) EXPECT_NEAR(c / static_cast<double>(n), 0.25, 0.01) << idx;
    EXPECT_THROW(sample_task_index(0, 1), std::invalid_argument);
}

TEST(FtmlStep, SkipsEmptyTasksAndThrowsWhenAllEmpty) {
    const ModelSpec spec = ModelSpec::gaussian_mean(1);
    const MetaTaskSource empty1{1, [](std::uint64_t) { return Batch{}; }};
    const MetaTaskSource empty2{2, [](std::uint64_t) { return Batch{}; }};
    const MetaTaskSource live{3, [&](std::uint64_t s) { return random_batch(spec, 6, s); }};
    const std::vector<MetaTaskSource> seen{empty1, empty2};
    MetaConfig cfg;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        EXPECT_EQ(ftml_step(spec, Params{0}, seen, live, cfg, seed).task_id, 3);
    }
    EXPECT_THROW(ftml_step(spec, Params{0}, seen, empty1, cfg, 0), std::runtime_error);
}

TEST(FtmlStep, PicksTasksUniformlyAndDeterministically) {
    const ModelSpec spec = ModelSpec::gaussian_mean(1);
    std::vector<MetaTaskSource> seen;
    for (int id = 1; id <= 2; ++id) seen.push_back({id, [&](std::uint64_t s) { return random_batch(spec, 4, s); }});
    const MetaTaskSource current{3, [&](std::uint64_t s) { return random_batch(spec, 4, s); }};
    MetaConfig cfg;
    std::map<int, int> counts;
    for (std::uint64_t seed = 0; seed < 3000; ++seed) ++counts[ftml_step(spec, Params{0}, seen, current, cfg, seed).task_id];
    for (int id = 1; id <= 3; ++id) EXPECT_NEAR(counts[id] / 3000.0, 1.0 / 3.0, 0.04);
    const FtmlResult a = ftml_step(spec, Params{0.5}, seen, current, cfg, 99);
    const FtmlResult b = ftml_step(spec, Params{0.5}, seen, current, cfg, 99);
    EXPECT_EQ(a.update.theta, b.update.theta);
}

TEST(MetaConfig, Validation) {
    MetaConfig c;
    EXPECT_NO_THROW(c.validate());
    c.inner_steps = 2;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.eta = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}
