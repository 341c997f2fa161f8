#pragma once

#include <cstddef>
#include <variant>

#include "trcl/linalg.hpp"

namespace trcl {

/// Full matrices are only materialized up to this parameter dimension.
inline constexpr std::size_t kMaxFullDimension = 512;

/// Asymmetry above this triggers a warning when a Full curvature is built.
inline constexpr double kSymmetryWarnTolerance = 1e-8;

struct FullCurvature {
    Matrix matrix;
};

struct DiagonalCurvature {
    Vector values;
};

/// rho * u u^T with ||u|| = 1.
struct RankOneCurvature {
    double rho = 0.0;
    Vector u;
};

enum class CurvatureKind { Full, Diagonal, RankOne };

/// Symmetric PSD curvature (Fisher or Hessian) in one of three
/// representations. Immutable once built; the factories enforce the
/// representation invariants.
class Curvature {
public:
    using Representation = std::variant<FullCurvature, DiagonalCurvature, RankOneCurvature>;

    /// Symmetrizes (M + M^T)/2. Warns if the input asymmetry exceeds
    /// kSymmetryWarnTolerance; throws DimensionError for non-square input or
    /// dimension above kMaxFullDimension.
    static Curvature full(Matrix m);
    /// Entries must be finite and nonnegative.
    static Curvature diagonal(Vector values);
    /// Requires rho >= 0 and |1 - ||u||| <= 1e-10.
    static Curvature rank_one(double rho, Vector u);
    /// Normalizes `direction` first; throws if it is (numerically) zero.
    static Curvature rank_one_along(double rho, const Vector& direction);

    [[nodiscard]] std::size_t dim() const noexcept;
    [[nodiscard]] CurvatureKind kind() const noexcept;
    [[nodiscard]] const Representation& representation() const noexcept { return rep_; }

    /// Dense copy of the represented operator.
    [[nodiscard]] Matrix to_matrix() const;

private:
    explicit Curvature(Representation rep) : rep_(std::move(rep)) {}
    Representation rep_;
};

/// F d for the represented F.
Vector curvature_apply(const Curvature& c, const Vector& d);

/// Representation of F^2. Rank-one inputs stay rank-one: (rho u u^T)^2 = rho^2 u u^T.
Curvature curvature_square(const Curvature& c);

/// d^T F d, computed as dot(d, curvature_apply(c, d)).
double quadratic_form(const Curvature& c, const Vector& d);

struct EigenPair {
    double value = 0.0;
    Vector vector;
    bool converged = false;
    /// Set for the zero matrix; `vector` is then an arbitrary unit vector.
    bool degenerate = false;
    int iterations = 0;
};

/// Power iteration for the dominant eigenpair of a symmetric PSD matrix.
/// Stops once ||M v - lambda v|| <= tol * lambda; `converged` is false if
/// `iters` ran out first.
EigenPair top_eigenpair(const Matrix& m, int iters, double tol);

}  // namespace trcl
