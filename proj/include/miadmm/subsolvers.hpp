#pragma once

// Exact solvers for the convex block subproblems.
//
//  * cd_solve_quadratic: min ½xᵀPx − qᵀx + Σ γ_j|x_j| under per-coordinate sign
//    constraints, by cyclic coordinate descent.
//  * frob_ball_solve: min ‖DY − X‖²_F + (ρ/2)‖D − C‖²_F s.t. ‖D‖_F ≤ 1, by a
//    secular equation in the ball multiplier.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "miadmm/errors.hpp"
#include "miadmm/numerics.hpp"

namespace miadmm {

enum class CoordConstraint : std::uint8_t { Free, NonNegative, NonPositive, FixedZero };

using CoordConstraints = std::vector<CoordConstraint>;

inline bool satisfies(CoordConstraint c, double v) {
    switch (c) {
        case CoordConstraint::Free: return true;
        case CoordConstraint::NonNegative: return v >= 0.0;
        case CoordConstraint::NonPositive: return v <= 0.0;
        case CoordConstraint::FixedZero: return v == 0.0;
    }
    return false;
}

inline double clamp_to(CoordConstraint c, double v) {
    switch (c) {
        case CoordConstraint::Free: return v;
        case CoordConstraint::NonNegative: return std::max(v, 0.0);
        case CoordConstraint::NonPositive: return std::min(v, 0.0);
        case CoordConstraint::FixedZero: return 0.0;
    }
    return v;
}

inline Vector clamp_to(std::span<const CoordConstraint> cs, Vector v) {
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = clamp_to(cs[j], v[j]);
    return v;
}

inline bool feasible(std::span<const CoordConstraint> cs, const Vector& v) {
    for (Eigen::Index j = 0; j < v.size(); ++j)
        if (!satisfies(cs[j], v[j])) return false;
    return true;
}

inline double soft_threshold(double b, double gamma) {
    if (b > gamma) return b - gamma;
    if (b < -gamma) return b + gamma;
    return 0.0;
}

/// Exact minimizer of ½a·t² − b·t + γ|t| over the feasible set of `c`.
inline double scalar_coordinate_min(double a, double b, double gamma, CoordConstraint c) {
    if (c == CoordConstraint::FixedZero) return 0.0;
    return clamp_to(c, soft_threshold(b, gamma) / a);
}

struct QuadSubproblem {
    Matrix P;
    Vector q;
    Vector l1_weight;  // empty means no ℓ1 term
    CoordConstraints constraints;
    Vector x0;
    double tol = 1e-10;
    int max_sweeps = 10000;
};

struct CdResult {
    Vector x;
    int sweeps = 0;
    double kkt_residual = 0.0;
};

inline double l1_at(const Vector& l1, Eigen::Index j) { return l1.size() ? l1[j] : 0.0; }

inline double quad_objective(const Matrix& p, const Vector& q, const Vector& l1, const Vector& x) {
    double v = 0.5 * x.dot(p * x) - q.dot(x);
    if (l1.size()) v += l1.dot(x.cwiseAbs());
    return v;
}

inline double quad_objective(const QuadSubproblem& s, const Vector& x) {
    return quad_objective(s.P, s.q, s.l1_weight, x);
}

/// Largest violation of first-order optimality: for each coordinate, the most
/// negative directional derivative along a feasible direction (0 if none).
inline double kkt_residual(const Vector& grad, const Vector& l1, std::span<const CoordConstraint> cs,
                           const Vector& x) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const CoordConstraint c = cs[j];
        if (c == CoordConstraint::FixedZero) continue;
        const double g = grad[j];
        const double gamma = l1_at(l1, j);
        double up;
        double down;
        if (x[j] > 0.0) {
            up = g + gamma;
            down = -(g + gamma);
        } else if (x[j] < 0.0) {
            up = g - gamma;
            down = -(g - gamma);
        } else {
            up = g + gamma;
            down = gamma - g;
        }
        const bool up_ok = !(c == CoordConstraint::NonPositive && x[j] >= 0.0);
        const bool down_ok = !(c == CoordConstraint::NonNegative && x[j] <= 0.0);
        if (up_ok) worst = std::max(worst, -up);
        if (down_ok) worst = std::max(worst, -down);
    }
    return worst;
}

inline double kkt_residual(const QuadSubproblem& s, const Vector& x) {
    return kkt_residual(Vector(s.P * x - s.q), s.l1_weight, s.constraints, x);
}

namespace detail {

// Coordinate step when the diagonal entry vanishes (singular PSD forms, e.g. a
// zero factor row in an unregularized block). The coordinate objective is then
// −b·t + γ|t|.
inline double flat_coordinate_min(double b, double gamma, CoordConstraint c, double current) {
    const bool up_ok = c != CoordConstraint::NonPositive;
    const bool down_ok = c != CoordConstraint::NonNegative;
    if ((up_ok && b > gamma) || (down_ok && b < -gamma))
        throw NotPositiveDefinite("coordinate objective unbounded below (zero curvature)");
    if (gamma == 0.0 && b == 0.0) return current;
    return 0.0;
}

}  // namespace detail

/// Cyclic coordinate descent in ascending index order. FixedZero coordinates are
/// never visited. Throws MaxSweepsExceeded carrying the last iterate.
inline CdResult cd_solve_quadratic(const Matrix& p, const Vector& q, const Vector& l1,
                                   std::span<const CoordConstraint> cs, Vector x0, double tol,
                                   int max_sweeps = 10000) {
    const Eigen::Index n = q.size();
    if (p.rows() != n || p.cols() != n || x0.size() != n || static_cast<Eigen::Index>(cs.size()) != n
        || (l1.size() != 0 && l1.size() != n))
        throw InvalidArgument("cd_solve_quadratic: inconsistent dimensions");
    if (!(tol > 0.0)) throw InvalidArgument("cd_solve_quadratic: tol must be positive");
    if (l1.size() && (l1.array() < 0.0).any()) throw InvalidArgument("cd_solve_quadratic: negative l1 weight");
    if (!feasible(cs, x0)) throw InvalidArgument("cd_solve_quadratic: warm start violates constraints");

    CdResult r;
    r.x = std::move(x0);
    Vector& x = r.x;
    Vector g = p * x - q;

    // The incrementally maintained gradient drifts; refresh it periodically and
    // always before declaring convergence.
    constexpr int kRefresh = 16;
    for (int sweep = 0;; ++sweep) {
        const bool fresh = sweep % kRefresh == 0;
        if (fresh) g.noalias() = p * x - q;
        r.kkt_residual = kkt_residual(g, l1, cs, x);
        if (r.kkt_residual <= tol && !fresh) {
            g.noalias() = p * x - q;
            r.kkt_residual = kkt_residual(g, l1, cs, x);
        }
        if (r.kkt_residual <= tol) {
            r.sweeps = sweep;
            return r;
        }
        if (sweep >= max_sweeps) throw MaxSweepsExceeded(x, r.kkt_residual);

        for (Eigen::Index j = 0; j < n; ++j) {
            const CoordConstraint c = cs[j];
            if (c == CoordConstraint::FixedZero) continue;
            const double a = p(j, j);
            const double b = a * x[j] - g[j];
            const double gamma = l1_at(l1, j);
            const double t = a > 0.0 ? scalar_coordinate_min(a, b, gamma, c)
                                     : detail::flat_coordinate_min(b, gamma, c, x[j]);
            const double d = t - x[j];
            if (d != 0.0) {
                g.noalias() += d * p.row(j).transpose();
                x[j] = t;
            }
        }
    }
}

inline CdResult cd_solve_quadratic(const QuadSubproblem& s) {
    return cd_solve_quadratic(s.P, s.q, s.l1_weight, s.constraints, s.x0, s.tol, s.max_sweeps);
}

/// Warm start for a block solve: the better (by objective) of the clamped
/// unconstrained minimizer and `previous`, which must already be feasible.
inline Vector choose_warm_start(const Matrix& p, const SpdFactor& factor, const Vector& q,
                                const Vector& l1, std::span<const CoordConstraint> cs,
                                const Vector& previous) {
    Vector clamped = clamp_to(cs, factor.solve(q));
    if (previous.size() != q.size() || !feasible(cs, previous)) return clamped;
    return quad_objective(p, q, l1, clamped) <= quad_objective(p, q, l1, previous) ? clamped
                                                                                   : previous;
}

struct FrobBallResult {
    Matrix D;
    double mu = 0.0;  // multiplier of the ball constraint
};

/// Minimizes ‖DY − X‖²_F + (ρ/2)‖D − C‖²_F subject to ‖D‖_F ≤ 1 given G = YYᵀ and
/// R = XYᵀ. Stationarity is D(2G + (ρ + 2μ)I) = 2R + ρC; μ is found by bisection
/// on ‖D(μ)‖_F = 1 when the unconstrained solution leaves the ball.
inline FrobBallResult frob_ball_solve(const Matrix& g, const Matrix& r, double rho, const Matrix& c,
                                      double tol = 1e-12) {
    const Eigen::Index k = g.rows();
    if (g.cols() != k || r.cols() != k || c.rows() != r.rows() || c.cols() != k)
        throw InvalidArgument("frob_ball_solve: inconsistent dimensions");
    if (!(rho >= 0.0)) throw InvalidArgument("frob_ball_solve: rho must be nonnegative");
    if (!(tol > 0.0)) throw InvalidArgument("frob_ball_solve: tol must be positive");

    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    if (es.info() != Eigen::Success) throw NotPositiveDefinite("frob_ball_solve: eigensolver failed");
    const Vector lambda = es.eigenvalues().cwiseMax(0.0);
    const Matrix& basis = es.eigenvectors();
    const Matrix rotated = (2.0 * r + rho * c) * basis;  // columns map to eigenpairs
    const Vector weight = rotated.colwise().squaredNorm().transpose();

    auto norm_sq = [&](double mu) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            const double den = 2.0 * lambda[j] + rho + 2.0 * mu;
            if (weight[j] == 0.0) continue;
            if (den <= 0.0) return std::numeric_limits<double>::infinity();
            s += weight[j] / (den * den);
        }
        return s;
    };
    auto solution = [&](double mu) {
        Vector inv(k);
        for (Eigen::Index j = 0; j < k; ++j) {
            const double den = 2.0 * lambda[j] + rho + 2.0 * mu;
            inv[j] = den > 0.0 ? 1.0 / den : 0.0;
        }
        return Matrix(rotated * inv.asDiagonal() * basis.transpose());
    };

    FrobBallResult out;
    if (norm_sq(0.0) <= 1.0) {
        out.D = solution(0.0);
        const double nrm = out.D.norm();
        if (nrm > 1.0) out.D /= nrm;
        return out;
    }

    double lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    while (norm_sq(hi) > 1.0) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 200) throw BisectionFailed("frob_ball_solve: no bracket for the multiplier");
    }
    for (int it = 0; it < 400; ++it) {
        const double gap = 1.0 - std::sqrt(norm_sq(hi));
        if (gap <= tol && hi * gap <= tol) break;
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (norm_sq(mid) > 1.0 ? lo : hi) = mid;
    }
    out.mu = hi;
    out.D = solution(hi);
    const double nrm = out.D.norm();
    if (nrm > 1.0) out.D /= nrm;
    return out;
}

}  // namespace miadmm
