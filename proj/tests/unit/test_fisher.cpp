#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "trcl/fisher.hpp"
#include "trcl/rng.hpp"
#include "trcl/verify.hpp"

using namespace trcl;

TEST(FisherFromGradients, CollinearGradientsGiveRankOne) {
    const std::vector<Vector> g{{1, 0}, {1, 0}};
    const FisherEstimate est = fisher_from_gradients(g, FisherMode::RankOne);
    ASSERT_EQ(est.curvature.kind(), CurvatureKind::RankOne);
    const auto& r = std::get<RankOneCurvature>(est.curvature.representation());
    EXPECT_DOUBLE_EQ(r.rho, 1.0);
    EXPECT_EQ(r.u, (Vector{1, 0}));
    EXPECT_FALSE(est.degenerate);
    EXPECT_DOUBLE_EQ(est.collinearity, 1.0);
}

TEST(FisherFromGradients, ZeroMeanGradientIsDegenerate) {
    const std::vector<Vector> g{{1, 0}, {-1, 0}};
    const FisherEstimate est = fisher_from_gradients(g, FisherMode::RankOne);
    EXPECT_TRUE(est.degenerate);
    const auto& r = std::get<RankOneCurvature>(est.curvature.representation());
    EXPECT_EQ(r.rho, 0.0);
    EXPECT_EQ(r.u, (Vector{1, 0}));
}

TEST(FisherFromGradients, FullIsMeanOuterProduct) {
    const std::vector<Vector> g{{1, 2}, {3, -1}};
    const Matrix f = fisher_from_gradients(g, FisherMode::Full).curvature.to_matrix();
    EXPECT_DOUBLE_EQ(f(0, 0), 5.0);
    EXPECT_DOUBLE_EQ(f(0, 1), -0.5);
    EXPECT_DOUBLE_EQ(f(1, 0), -0.5);
    EXPECT_DOUBLE_EQ(f(1, 1), 2.5);
}

TEST(FisherFromGradients, RejectsEmptyInput) {
    EXPECT_THROW(fisher_from_gradients(std::vector<Vector>{}, FisherMode::Full), std::invalid_argument);
}

class EmpiricalFisherMlp : public ::testing::Test {
protected:
    ModelSpec spec = ModelSpec::mlp({2, 4, 1});
    Params theta;
    Batch data;

    void SetUp() override {
        theta = init_params(spec, 3);
        data = random_batch(spec, 40, 3);
    }
};

TEST_F(EmpiricalFisherMlp, FullIsSymmetricPsd) {
    const Matrix f = empirical_fisher(spec, theta, data, FisherMode::Full, 0).curvature.to_matrix();
    EXPECT_EQ(f.max_asymmetry(), 0.0);
    const Curvature c = Curvature::full(f);
    auto gen = keyed_engine({1, 2});
    for (int i = 0; i < 50; ++i) EXPECT_GE(quadratic_form(c, standard_normal(gen, spec.param_dim())), 0.0);
}

TEST_F(EmpiricalFisherMlp, DiagonalEqualsDiagonalOfFullExactly) {
    const Matrix full = empirical_fisher(spec, theta, data, FisherMode::Full, 5).curvature.to_matrix();
    const FisherEstimate diag = empirical_fisher(spec, theta, data, FisherMode::Diagonal, 5);
    EXPECT_EQ(std::get<DiagonalCurvature>(diag.curvature.representation()).values, full.diagonal());
}

TEST_F(EmpiricalFisherMlp, RankOneRhoBoundedByTopEigenvalue) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Params p = init_params(spec, seed);
        const Matrix full = empirical_fisher(spec, p, data, FisherMode::Full, 0).curvature.to_matrix();
        const FisherEstimate r1 = empirical_fisher(spec, p, data, FisherMode::RankOne, 0);
        const double top = oracle::jacobi_eigen(full).values[0];
        EXPECT_LE(std::get<RankOneCurvature>(r1.curvature.representation()).rho, top + 1e-8);
    }
}

TEST(EmpiricalFisher, RankOneTracksTopEigenvalueWhenCollinear) {
    // A biased linear model far from its targets: every per-sample gradient
    // is dominated by the shared residual sign, so they are nearly collinear.
    const ModelSpec spec = ModelSpec::mlp({2, 1});
    Batch data;
    auto gen = keyed_engine({4, 4});
    for (int i = 0; i < 64; ++i) {
        Vector x = standard_normal(gen, 2);
        x *= 0.1;
        x[0] += 1.0;
        data.push_back({x, Vector{-5.0}});
    }
    const Params theta{0.0, 0.0, 0.0};
    const FisherEstimate r1 = empirical_fisher(spec, theta, data, FisherMode::RankOne, 0);
    ASSERT_GT(r1.collinearity, 0.9);
    const Matrix full = empirical_fisher(spec, theta, data, FisherMode::Full, 0).curvature.to_matrix();
    const double top = top_eigenpair(full, 10000, 1e-12).value;
    const double rho = std::get<RankOneCurvature>(r1.curvature.representation()).rho;
    EXPECT_LE(std::abs(rho - top), 0.1 * top);
}

TEST(EmpiricalFisher, GaussianMeanAtDataMeanIsNearIdentity) {
    const ModelSpec spec = ModelSpec::gaussian_mean(3);
    Batch data;
    auto gen = keyed_engine({8, 1});
    Vector mean(3);
    for (int i = 0; i < 20000; ++i) {
        data.push_back({standard_normal(gen, 3), std::nullopt});
        mean += data.back().input;
    }
    mean *= 1.0 / 20000.0;
    const Matrix f = empirical_fisher(spec, mean, data, FisherMode::Full, 0).curvature.to_matrix();
    EXPECT_LE(frobenius_norm(f - Matrix::identity(3)), 0.05);
}

TEST(FisherHessianCheck, GaussianMeanWithinMonteCarloBound) {
    const Params mu{0.3, -1.0, 2.0, 0.0};
    const std::size_t n = 100000;
    const FisherHessianReport r = fisher_hessian_check(ExpFamily::gaussian_mean(4), mu, n, 1);
    EXPECT_LE(r.frobenius_rel_err, 0.05);
    EXPECT_EQ(r.expected_hessian, Matrix::identity(4));
    EXPECT_EQ(r.n, n);
}

TEST(FisherHessianCheck, CategoricalMatchesClosedForm) {
    const std::vector<double> logits{0.0, 0.0, 0.0};
    const FisherHessianReport r = fisher_hessian_check(ExpFamily::categorical(3), Params{0, 0, 0}, 100000, 2);
    const Matrix closed = oracle::softmax_fisher(logits);
    // The expected Hessian of the softmax NLL does not depend on the draw.
    EXPECT_LE(frobenius_norm(r.expected_hessian - closed), 1e-12);
    EXPECT_LE(frobenius_norm(r.fisher - closed) / frobenius_norm(closed), 0.05);
    EXPECT_LE(r.frobenius_rel_err, 0.05);
}

TEST(FisherHessianCheck, ErrorShrinksLikeInverseSqrtN) {
    double ratio_sum = 0.0;
    const int pairs = 8;
    for (int s = 0; s < pairs; ++s) {
        const Params mu{0.0, 0.0, 0.0, 0.0};
        const double small = fisher_hessian_check(ExpFamily::gaussian_mean(4), mu, 1000, 100 + s).frobenius_rel_err;
        const double large = fisher_hessian_check(ExpFamily::gaussian_mean(4), mu, 100000, 200 + s).frobenius_rel_err;
        ratio_sum += small / large;
    }
    const double ratio = ratio_sum / pairs;
    EXPECT_GE(ratio, 5.0);
    EXPECT_LE(ratio, 20.0);
}

TEST(FisherHessianCheck, RejectsUnsupportedFamilies) {
    EXPECT_THROW(fisher_hessian_check(ExpFamily::categorical(5), Params(5), 10, 0), std::invalid_argument);
    EXPECT_THROW(fisher_hessian_check(ExpFamily::gaussian_mean(2), Params(3), 10, 0), DimensionError);
}

TEST(Softmax, NormalizedAndShiftInvariant) {
    const Vector p = softmax({1000.0, 1001.0, 999.0});
    EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);
    const Vector q = softmax({0.0, 1.0, -1.0});
    EXPECT_LE(max_abs(p - q), 1e-15);
}

TEST(MeanPairwiseCosine, Extremes) {
    const std::vector<Vector> same{{1, 1}, {2, 2}, {3, 3}};
    EXPECT_NEAR(mean_pairwise_cosine(same), 1.0, 1e-15);
    const std::vector<Vector> opposite{{1, 0}, {-1, 0}};
    EXPECT_NEAR(mean_pairwise_cosine(opposite), -1.0, 1e-15);
}
