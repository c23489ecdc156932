#pragma once

// Sparse dictionary learning:
//
//   min_{D,Y} ½‖DY − X‖²_F + γ‖Y‖₁   s.t.  ‖D‖_F ≤ 1
//
// with blocks vec(D) and vec(Y) stacked into z. Matrices are vectorized row-major.

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>

#include "miadmm/problem.hpp"
#include "miadmm/problems/common.hpp"

namespace miadmm::problems {

struct DictLearnProblem {
    Matrix X;  // features × samples
    double gamma = 0.0;
    Eigen::Index atoms = 1;
};

inline double dictlearn_objective(const Matrix& x, double gamma, const Matrix& d, const Matrix& y) {
    return 0.5 * (d * y - x).squaredNorm() + gamma * y.cwiseAbs().sum();
}

/// Columns of X taken cyclically, scaled to unit Frobenius norm. D = 0 would be
/// a fixed point of the alternating scheme.
inline Matrix initial_dictionary(const Matrix& x, Eigen::Index atoms) {
    Matrix d(x.rows(), atoms);
    for (Eigen::Index k = 0; k < atoms; ++k) d.col(k) = x.col(k % x.cols());
    double nrm = d.norm();
    if (nrm == 0.0) {
        d = Matrix::Identity(x.rows(), atoms);
        nrm = d.norm();
    }
    d /= nrm;
    while (d.squaredNorm() > 1.0) d *= 1.0 - 1e-15;  // rounding can land just outside
    return d;
}

inline ProblemSpec build_dictlearn_problem(const DictLearnProblem& p) {
    const Eigen::Index rows = p.X.rows();
    const Eigen::Index cols = p.X.cols();
    const Eigen::Index r = p.atoms;
    if (rows < 1 || cols < 1) throw InvalidArgument("build_dictlearn_problem: empty data");
    if (r < 1 || r > std::min(rows, cols)) throw InvalidArgument("build_dictlearn_problem: need 1 <= r <= min dims");
    if (!(p.gamma >= 0.0)) throw InvalidArgument("build_dictlearn_problem: gamma must be nonnegative");
    if (!all_finite(p.X)) throw InvalidArgument("build_dictlearn_problem: non-finite data");

    auto data = std::make_shared<DictLearnProblem>(p);
    ProblemSpec spec;
    spec.z_dim = rows * r + r * cols;
    spec.smooth = SmoothTerm::zero();

    // D-block: min ½‖DY − X‖² + (w/2)‖D − T‖² on the unit ball; scaled by 2 this
    // is the ball solver's form with penalty 2w.
    spec.blocks.push_back({rows * r, StackSelector{0}, [data, rows, cols, r](const BlockContext& ctx) {
                               const auto y = as_matrix(ctx.blocks[1], r, cols);
                               const Matrix g = y * y.transpose();
                               const Matrix rhs = data->X * y.transpose();
                               const Vector t = ctx.local_target();
                               const auto res = frob_ball_solve(g, rhs, 2.0 * ctx.weight, as_matrix(t, rows, r));
                               return flatten(res.D);
                           }});
    // Y-block: separable over columns, each a lasso in r unknowns.
    spec.blocks.push_back({r * cols, StackSelector{rows * r}, [data, rows, cols, r](const BlockContext& ctx) {
                               const auto d = as_matrix(ctx.blocks[0], rows, r);
                               Matrix p = d.transpose() * d;
                               p.diagonal().array() += ctx.weight;
                               Matrix rhs = d.transpose() * data->X;
                               rhs += ctx.weight * as_matrix(ctx.local_target(), r, cols);
                               return flatten(solve_columns(p, rhs, data->gamma, CoordConstraint::Free,
                                                            Matrix(as_matrix(ctx.current(), r, cols)),
                                                            ctx.sub_tol));
                           }});
    spec.objective = [data, rows, cols, r](std::span<const Vector> x) {
        return dictlearn_objective(data->X, data->gamma, as_matrix(x[0], rows, r), as_matrix(x[1], r, cols));
    };
    spec.inequality = [](std::span<const Vector> x) { return Vector::Constant(1, x[0].squaredNorm() - 1.0); };
    spec.initial_point = {flatten(initial_dictionary(p.X, r)), Vector::Zero(r * cols)};
    return spec;
}

/// X = D*Y* with D* uniform in [−1, 1] and Y* uniform in [−1, 1] at density ½.
inline DictLearnProblem gen_dictlearn(Eigen::Index features, Eigen::Index samples, Eigen::Index atoms,
                                      double gamma, std::uint64_t seed) {
    if (features < 1 || samples < 1 || atoms < 1) throw InvalidArgument("gen_dictlearn: sizes must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Matrix d(features, atoms);
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = 0; j < d.cols(); ++j) d(i, j) = unif(rng);
    Matrix y(atoms, samples);
    for (Eigen::Index i = 0; i < y.rows(); ++i)
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            const double v = unif(rng);
            y(i, j) = unif(rng) < 0.0 ? 0.0 : v;
        }
    return {d * y, gamma, atoms};
}

}  // namespace miadmm::problems
