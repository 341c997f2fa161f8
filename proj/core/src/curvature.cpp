#include "trcl/curvature.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>

#include "trcl/diagnostics.hpp"

namespace trcl {

namespace {

std::mutex& warning_mutex() {
    static std::mutex m;
    return m;
}

WarningHandler& warning_slot() {
    static WarningHandler handler;
    return handler;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
    std::lock_guard lock(warning_mutex());
    return std::exchange(warning_slot(), std::move(handler));
}

void warn(std::string_view message) {
    std::lock_guard lock(warning_mutex());
    if (warning_slot()) {
        warning_slot()(message);
    } else {
        std::cerr << "trcl warning: " << message << '\n';
    }
}

Curvature Curvature::full(Matrix m) {
    if (!m.is_square()) throw DimensionError("Curvature::full: matrix is not square");
    if (m.rows() > kMaxFullDimension) {
        throw DimensionError("Curvature::full: dimension " + std::to_string(m.rows()) +
                             " exceeds cap " + std::to_string(kMaxFullDimension));
    }
    if (!m.all_finite()) throw std::invalid_argument("Curvature::full: non-finite entry");
    const double asym = m.max_asymmetry();
    if (asym > kSymmetryWarnTolerance) {
        std::ostringstream os;
        os << "Curvature::full: symmetrizing input with asymmetry " << asym;
        warn(os.str());
    }
    const std::size_t n = m.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = avg;
            m(j, i) = avg;
        }
    return Curvature(FullCurvature{std::move(m)});
}

Curvature Curvature::diagonal(Vector values) {
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("Curvature::diagonal: entries must be finite and >= 0");
    }
    return Curvature(DiagonalCurvature{std::move(values)});
}

Curvature Curvature::rank_one(double rho, Vector u) {
    if (!std::isfinite(rho) || rho < 0.0)
        throw std::invalid_argument("Curvature::rank_one: rho must be finite and >= 0");
    if (!u.all_finite()) throw std::invalid_argument("Curvature::rank_one: non-finite direction");
    if (std::abs(norm2(u) - 1.0) > 1e-10)
        throw std::invalid_argument("Curvature::rank_one: direction is not unit length");
    return Curvature(RankOneCurvature{rho, std::move(u)});
}

Curvature Curvature::rank_one_along(double rho, const Vector& direction) {
    const double n = norm2(direction);
    if (!(n > 0.0) || !std::isfinite(n))
        throw std::invalid_argument("Curvature::rank_one_along: zero or non-finite direction");
    return rank_one(rho, (1.0 / n) * direction);
}

std::size_t Curvature::dim() const noexcept {
    return std::visit(overloaded{
                          [](const FullCurvature& f) { return f.matrix.rows(); },
                          [](const DiagonalCurvature& d) { return d.values.size(); },
                          [](const RankOneCurvature& r) { return r.u.size(); },
                      },
                      rep_);
}

CurvatureKind Curvature::kind() const noexcept {
    return static_cast<CurvatureKind>(rep_.index());
}

Matrix Curvature::to_matrix() const {
    return std::visit(overloaded{
                          [](const FullCurvature& f) { return f.matrix; },
                          [](const DiagonalCurvature& d) {
                              Matrix m(d.values.size(), d.values.size());
                              for (std::size_t i = 0; i < d.values.size(); ++i) m(i, i) = d.values[i];
                              return m;
                          },
                          [](const RankOneCurvature& r) {
                              Matrix m(r.u.size(), r.u.size());
                              m.add_outer(r.rho, r.u);
                              return m;
                          },
                      },
                      rep_);
}

Vector curvature_apply(const Curvature& c, const Vector& d) {
    if (c.dim() != d.size()) {
        throw DimensionError("curvature_apply: curvature dim " + std::to_string(c.dim()) +
                             " vs vector dim " + std::to_string(d.size()));
    }
    return std::visit(overloaded{
                          [&](const FullCurvature& f) { return f.matrix * d; },
                          [&](const DiagonalCurvature& diag) {
                              Vector out(d.size());
                              for (std::size_t i = 0; i < d.size(); ++i) out[i] = diag.values[i] * d[i];
                              return out;
                          },
                          [&](const RankOneCurvature& r) { return (r.rho * dot(r.u, d)) * r.u; },
                      },
                      c.representation());
}

Curvature curvature_square(const Curvature& c) {
    return std::visit(overloaded{
                          [](const FullCurvature& f) { return Curvature::full(f.matrix * f.matrix); },
                          [](const DiagonalCurvature& d) {
                              Vector sq = d.values;
                              for (double& v : sq) v *= v;
                              return Curvature::diagonal(std::move(sq));
                          },
                          [](const RankOneCurvature& r) { return Curvature::rank_one(r.rho * r.rho, r.u); },
                      },
                      c.representation());
}

double quadratic_form(const Curvature& c, const Vector& d) {
    return dot(d, curvature_apply(c, d));
}

EigenPair top_eigenpair(const Matrix& m, int iters, double tol) {
    if (!m.is_square()) throw DimensionError("top_eigenpair: matrix is not square");
    if (iters <= 0) throw std::invalid_argument("top_eigenpair: iters must be positive");
    const std::size_t n = m.rows();
    EigenPair result;
    if (n == 0) throw DimensionError("top_eigenpair: empty matrix");

    if (frobenius_norm(m) == 0.0) {
        result.vector = Vector::basis(n, 0);
        result.degenerate = true;
        result.converged = true;
        return result;
    }

    // Fixed start so results are reproducible.
    std::mt19937_64 gen(0x7c3a9e11u);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = unif(gen);
    v *= 1.0 / norm2(v);

    for (int it = 1; it <= iters; ++it) {
        Vector w = m * v;
        const double lambda = dot(v, w);
        Vector residual = w;
        residual.add_scaled(-lambda, v);
        result.value = lambda;
        result.vector = v;
        result.iterations = it;
        if (norm2(residual) <= tol * std::abs(lambda)) {
            result.converged = true;
            break;
        }
        const double wn = norm2(w);
        if (wn == 0.0) {
            // Start vector fell into the null space.
            result.degenerate = true;
            break;
        }
        v = (1.0 / wn) * std::move(w);
    }
    // Fix the sign so the largest-magnitude entry is positive.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(result.vector[i]) > std::abs(result.vector[arg])) arg = i;
    if (result.vector[arg] < 0.0) result.vector *= -1.0;
    return result;
}

}  // namespace trcl
