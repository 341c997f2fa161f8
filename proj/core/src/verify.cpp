#include "trcl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "trcl/continual.hpp"
#include "trcl/curvature.hpp"
#include "trcl/fisher.hpp"
#include "trcl/meta.hpp"
#include "trcl/rng.hpp"

namespace trcl {

namespace {

Vector random_unit(std::mt19937_64& gen, std::size_t n) {
    Vector v = standard_normal(gen, n);
    v *= 1.0 / norm2(v);
    return v;
}

CheckResult check_le(std::string suite, std::string name, double value, double threshold) {
    CheckResult c;
    c.suite = std::move(suite);
    c.name = std::move(name);
    c.value = value;
    c.threshold = threshold;
    c.passed = std::isfinite(value) && value <= threshold;
    return c;
}

void rank_one_square_suite(std::uint64_t seed, std::vector<CheckResult>& out) {
    auto gen = keyed_engine({seed, 0x5151});
    std::uniform_real_distribution<double> rho_dist(0.0, 5.0);
    std::uniform_int_distribution<std::size_t> dim_dist(1, 16);
    double worst_apply = 0.0;
    double worst_basis = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = dim_dist(gen);
        const double rho = rho_dist(gen);
        const Curvature c = Curvature::rank_one(rho, random_unit(gen, n));
        const Curvature sq = curvature_square(c);
        const Vector d = standard_normal(gen, n);
        const Vector lhs = curvature_apply(sq, d);
        const Vector rhs = rho * curvature_apply(c, d);
        worst_apply = std::max(worst_apply, norm2(lhs - rhs) / std::max(norm2(rhs), 1.0));
        const Vector twice = curvature_apply(c, curvature_apply(c, d));
        worst_apply = std::max(worst_apply, norm2(lhs - twice) / std::max(norm2(twice), 1.0));
        for (std::size_t j = 0; j < n; ++j) {
            const Vector e = Vector::basis(n, j);
            const Vector a = curvature_apply(sq, e);
            const Vector b = rho * curvature_apply(c, e);
            worst_basis = std::max(worst_basis, max_abs(a - b) / std::max(max_abs(b), 1.0));
        }
    }
    out.push_back(check_le("RankOneSquare", "F^2 d = rho F d (100 triples)", worst_apply, 1e-12));
    out.push_back(check_le("RankOneSquare", "F^2 = rho F on basis", worst_basis, 1e-12));
}

void fisher_identity_suite(std::uint64_t seed, std::vector<CheckResult>& out) {
    {
        auto gen = keyed_engine({seed, 0xf15e});
        const Params mu = standard_normal(gen, 4);
        const FisherHessianReport r = fisher_hessian_check(ExpFamily::gaussian_mean(4), mu, 100000, seed);
        out.push_back(check_le("FisherIdentity", "GaussianMean d=4 n=1e5 rel err", r.frobenius_rel_err, 0.05));
    }
    {
        const Params logits{0.0, 0.0, 0.0};
        const FisherHessianReport r = fisher_hessian_check(ExpFamily::categorical(3), logits, 100000, seed);
        const Vector p = softmax(logits);
        Matrix closed(3, 3);
        for (std::size_t i = 0; i < 3; ++i) closed(i, i) = p[i];
        closed.add_outer(-1.0, p);
        const double err = frobenius_norm(r.fisher - closed) / frobenius_norm(closed);
        out.push_back(check_le("FisherIdentity", "categorical K=3 vs diag(p)-pp^T", err, 0.05));
        out.push_back(check_le("FisherIdentity", "categorical K=3 E[gg^T] vs E[H]", r.frobenius_rel_err, 0.05));
    }
}

void grad_check_suite(std::uint64_t seed, std::vector<CheckResult>& out) {
    auto gen = keyed_engine({seed, 0x9a9a});
    const Matrix g = Matrix(4, 4, standard_normal(gen, 16).values());
    const std::vector<std::pair<std::string, ModelSpec>> specs = {
        {"GaussianMean", ModelSpec::gaussian_mean(3)},
        {"Mlp", ModelSpec::mlp({2, 8, 8, 1})},
        {"ToyDiffusion", ModelSpec::toy_diffusion_default(2)},
        {"Quadratic", ModelSpec::quadratic_task(Curvature::full(g.transpose() * g))},
    };
    for (const auto& [name, spec] : specs) {
        out.push_back(check_le("GradCheck", name + " max rel err (20 points)", grad_check_max_rel_err(spec, 20, seed), 1e-5));
    }
}

void taylor_suite(std::uint64_t seed, std::vector<CheckResult>& out) {
    const TaylorLocalityResult r = taylor_locality(seed);
    CheckResult c;
    c.suite = "TaylorLocality";
    c.name = "mean r(delta)/r(delta/2) at |delta|=0.1 in [3,5]";
    c.value = r.mean_ratio;
    c.threshold = 5.0;
    c.passed = r.mean_ratio >= 3.0 && r.mean_ratio <= 5.0;
    out.push_back(c);
}

void quad_equivalence_suite(std::uint64_t seed, std::vector<CheckResult>& out) {
    auto gen = keyed_engine({seed, 0x9e9e});
    std::uniform_real_distribution<double> rho_dist(0.5, 2.0);
    double worst_gap = 0.0;
    double worst_fo = 0.0;
    double worst_update = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 5;
        const double rho = rho_dist(gen);
        const Curvature f = Curvature::rank_one(rho, random_unit(gen, n));
        const ModelSpec spec = ModelSpec::quadratic_task(f);
        const Params theta_star = standard_normal(gen, n);
        const Params theta = theta_star + 0.1 * standard_normal(gen, n);
        const Batch data{Sample{theta_star, std::nullopt}};
        const SupportQuery sq{data, data};
        MetaConfig cfg;
        cfg.alpha = 0.1;
        cfg.eta = 0.5;
        cfg.first_order = false;
        const double lambda = cfg.alpha * rho;
        const TaskAnchor anchor(1, theta_star, f);

        const EquivalenceGap gap = equivalence_gap(spec, theta, anchor, data, sq, cfg, lambda);
        worst_gap = std::max(worst_gap, gap.gap_II_C);

        const MamlUpdate exact = maml_outer_update_exact(spec, theta, sq, cfg, seed);
        const MamlUpdate first = maml_outer_update_first_order(spec, theta, sq, cfg, seed);
        const Vector expected = (cfg.eta * cfg.alpha) * (hessian(spec, theta, sq.support, seed) * first.query_grad);
        const Vector diff = exact.theta - first.theta;
        worst_fo = std::max(worst_fo, norm2(diff - expected) / std::max(norm2(expected), 1e-300));

        // Old-task part of one trust-region step versus one exact MAML update.
        ContinualConfig cc;
        cc.lambda = lambda;
        cc.beta = 1.0;
        cc.eta = cfg.eta;
        const std::vector<ReplayBatch> replay{{1, data}};
        const std::vector<TaskAnchor> anchors{anchor};
        const Vector tr_dir = replay_grad_term(spec, theta, replay, cc.beta, seed) + ewc_grad_term(theta, anchors, cc.lambda);
        Params tr_theta = theta;
        tr_theta.add_scaled(-cc.eta, tr_dir);
        const Vector maml_step = exact.theta - theta;
        worst_update = std::max(worst_update, norm2(tr_theta - exact.theta) / std::max(norm2(maml_step), 1e-300));
    }
    out.push_back(check_le("QuadEquivalence", "rank-1 quadratic gap_II_C with lambda = alpha rho", worst_gap, 1e-10));
    out.push_back(check_le("QuadEquivalence", "exact - first-order = eta alpha H grad L(theta')", worst_fo, 1e-10));
    CheckResult info = check_le("QuadEquivalence", "trust-region old-task step vs exact MAML step (rel diff)",
                                worst_update, 1e-10);
    info.informational = true;
    info.detail = "(II) enters MAML with a minus sign and the EWC term with a plus sign";
    out.push_back(info);
}

}  // namespace

std::string to_string(VerifySuite s) {
    switch (s) {
        case VerifySuite::All: return "All";
        case VerifySuite::FisherIdentity: return "FisherIdentity";
        case VerifySuite::RankOneSquare: return "RankOneSquare";
        case VerifySuite::GradCheck: return "GradCheck";
        case VerifySuite::TaylorLocality: return "TaylorLocality";
        case VerifySuite::QuadEquivalence: return "QuadEquivalence";
    }
    return "?";
}

VerifySuite parse_verify_suite(const std::string& name) {
    for (VerifySuite s : {VerifySuite::All, VerifySuite::FisherIdentity, VerifySuite::RankOneSquare,
                          VerifySuite::GradCheck, VerifySuite::TaylorLocality, VerifySuite::QuadEquivalence}) {
        if (to_string(s) == name) return s;
    }
    throw std::invalid_argument("unknown verify suite: " + name);
}

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed || c.informational; });
}

std::string VerifyReport::to_text() const {
    std::ostringstream os;
    for (const CheckResult& c : checks) {
        const char* status = c.informational ? "INFO" : (c.passed ? "PASS" : "FAIL");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g (limit %.3g)", c.value, c.threshold);
        os << '[' << status << "] " << c.suite << ": " << c.name << " = " << buf;
        if (!c.detail.empty()) os << "  -- " << c.detail;
        os << '\n';
    }
    os << (passed() ? "verify: all checks passed\n" : "verify: FAILED\n");
    return os.str();
}

Batch random_batch(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
    auto gen = keyed_engine({seed, 0xba7c});
    Batch batch;
    for (std::size_t i = 0; i < n; ++i) {
        Sample s{standard_normal(gen, spec.input_dim()), std::nullopt};
        if (spec.family == ModelFamily::Mlp) s.target = standard_normal(gen, spec.layer_sizes.back());
        batch.push_back(std::move(s));
    }
    return batch;
}

double grad_check_max_rel_err(const ModelSpec& spec, int points, std::uint64_t seed, double h) {
    double worst = 0.0;
    for (int p = 0; p < points; ++p) {
        const std::uint64_t key = seed * 1000 + static_cast<std::uint64_t>(p);
        auto gen = keyed_engine({key, 0x6c6c});
        Params theta = init_params(spec, key);
        theta.add_scaled(0.5, standard_normal(gen, theta.size()));
        const Batch batch = random_batch(spec, 8, key);
        const Vector g = grad(spec, theta, batch, key);
        Vector fd(theta.size());
        Params probe = theta;
        for (std::size_t j = 0; j < theta.size(); ++j) {
            const double orig = probe[j];
            probe[j] = orig + h;
            const double lp = loss(spec, probe, batch, key);
            probe[j] = orig - h;
            const double lm = loss(spec, probe, batch, key);
            probe[j] = orig;
            fd[j] = (lp - lm) / (2.0 * h);
        }
        const double denom = std::max({norm2(g), norm2(fd), 1e-12});
        worst = std::max(worst, norm2(g - fd) / denom);
    }
    return worst;
}

TaylorLocalityResult taylor_locality(std::uint64_t seed, int directions, double delta_norm) {
    const ModelSpec spec = ModelSpec::mlp({2, 6, 1});
    const Params teacher = init_params(spec, seed + 17);
    Batch batch;
    auto gen = keyed_engine({seed, 0x7a7a});
    for (int i = 0; i < 32; ++i) {
        Vector x = standard_normal(gen, 2);
        Vector y = mlp_forward(spec, teacher, x);
        batch.push_back({std::move(x), std::move(y)});
    }
    const Matrix h = hessian(spec, teacher, batch, seed);
    auto residual = [&](const Vector& delta) {
        return norm2(grad(spec, teacher + delta, batch, seed) - h * delta);
    };
    TaylorLocalityResult result;
    double total = 0.0;
    for (int d = 0; d < directions; ++d) {
        const Vector dir = delta_norm * random_unit(gen, teacher.size());
        const double ratio = residual(dir) / residual(0.5 * dir);
        result.ratios.push_back(ratio);
        total += ratio;
    }
    result.mean_ratio = total / directions;
    return result;
}

VerifyReport run_verify(VerifySuite suite, std::uint64_t seed) {
    VerifyReport report;
    auto want = [&](VerifySuite s) { return suite == VerifySuite::All || suite == s; };
    if (want(VerifySuite::RankOneSquare)) rank_one_square_suite(seed, report.checks);
    if (want(VerifySuite::FisherIdentity)) fisher_identity_suite(seed, report.checks);
    if (want(VerifySuite::GradCheck)) grad_check_suite(seed, report.checks);
    if (want(VerifySuite::TaylorLocality)) taylor_suite(seed, report.checks);
    if (want(VerifySuite::QuadEquivalence)) quad_equivalence_suite(seed, report.checks);
    return report;
}

}  // namespace trcl
