#pragma once

// Small hand-built problems for exercising the engine directly.

#include <cmath>
#include <memory>

#include "miadmm/problem.hpp"
#include "miadmm/subsolvers.hpp"

namespace toy {

using miadmm::BlockContext;
using miadmm::CoordConstraint;
using miadmm::Matrix;
using miadmm::ProblemSpec;
using miadmm::Vector;

/// One stacked block with f = 0, g(x) = ½‖x‖², no constraints.
inline ProblemSpec ridge_to_origin(Eigen::Index dim) {
    ProblemSpec s;
    s.z_dim = dim;
    s.blocks.push_back({dim, miadmm::StackSelector{0}, [](const BlockContext& ctx) {
                            // argmin ½‖x‖² + (w/2)‖x − t‖²
                            return Vector(ctx.weight / (1.0 + ctx.weight) * ctx.local_target());
                        }});
    s.objective = [](std::span<const Vector> x) { return 0.5 * x[0].squaredNorm(); };
    s.inequality = [](std::span<const Vector>) { return Vector(); };
    s.initial_point = {Vector::Zero(dim)};
    return s;
}

inline CoordConstraint opposite_of(double partner) {
    if (partner > 0.0) return CoordConstraint::NonPositive;
    if (partner < 0.0) return CoordConstraint::NonNegative;
    return CoordConstraint::Free;
}

/// Three scalar unknowns split into x₁ ∈ R², x₂ ∈ R:
///   ½‖x₁ − a‖² + ½(x₂ − b)² + h(z),  x₁[0]·x₂ ≤ 0,  x₁[1] ≥ 0
/// with a quadratic h(z) = ½zᵀQz + cᵀz on z = [x₁; x₂].
inline ProblemSpec quadratic_h_problem(const Matrix& q, const Vector& c, const Vector& a, double b) {
    ProblemSpec s;
    s.z_dim = 3;
    s.smooth = miadmm::SmoothTerm::quadratic(q, c);
    s.blocks.push_back({2, miadmm::StackSelector{0}, [a](const BlockContext& ctx) {
                            const double w = ctx.weight;
                            Matrix p = (1.0 + w) * Matrix::Identity(2, 2);
                            const Vector lin = a + w * ctx.local_target();
                            miadmm::CoordConstraints cs{opposite_of(ctx.blocks[1][0]), CoordConstraint::NonNegative};
                            return miadmm::cd_solve_quadratic(p, lin, Vector(), cs,
                                                              miadmm::clamp_to(cs, ctx.current()), ctx.sub_tol)
                                .x;
                        }});
    s.blocks.push_back({1, miadmm::StackSelector{2}, [b](const BlockContext& ctx) {
                            const double w = ctx.weight;
                            Matrix p = Matrix::Constant(1, 1, 1.0 + w);
                            const Vector lin = Vector::Constant(1, b) + w * ctx.local_target();
                            miadmm::CoordConstraints cs{opposite_of(ctx.blocks[0][0])};
                            return miadmm::cd_solve_quadratic(p, lin, Vector(), cs,
                                                              miadmm::clamp_to(cs, ctx.current()), ctx.sub_tol)
                                .x;
                        }});
    s.objective = [a, b](std::span<const Vector> x) {
        return 0.5 * (x[0] - a).squaredNorm() + 0.5 * (x[1][0] - b) * (x[1][0] - b);
    };
    s.inequality = [](std::span<const Vector> x) { return Vector{{x[0][0] * x[1][0], -x[0][1]}}; };
    s.initial_point = {Vector::Zero(2), Vector::Zero(1)};
    return s;
}

/// A fixed instance of quadratic_h_problem; the largest eigenvalue of Q is below 0.5.
inline ProblemSpec quadratic_h_default() {
    Matrix q(3, 3);
    q << 0.4, 0.1, 0.0, 0.1, 0.3, 0.05, 0.0, 0.05, 0.2;
    return quadratic_h_problem(q, Vector{{0.1, -0.2, 0.3}}, Vector{{1.0, -0.5}}, 0.7);
}

}  // namespace toy
