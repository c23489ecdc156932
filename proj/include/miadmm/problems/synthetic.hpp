#pragma once

// Regularized linear regression with biconvex sign constraints:
//
//   min_{α,β} ‖y − X[α;β]‖² + λ1(‖α‖² + ‖β‖²)   s.t.  α_i β_i ≤ 0
//
// split as two stacked blocks (α, β) with z = [α; β] and h ≡ 0.

#include <cstdint>
#include <memory>
#include <random>

#include "miadmm/problem.hpp"
#include "miadmm/problems/common.hpp"

namespace miadmm::problems {

struct SyntheticDataset {
    Matrix X;  // N × 2M
    Vector y;
    Vector alpha_true;
    Vector beta_true;
    std::uint64_t seed = 0;

    Eigen::Index samples() const { return X.rows(); }
    Eigen::Index half_features() const { return alpha_true.size(); }
};

/// X, α, β ~ U[−1, 1]; y = X[α;β] + ε with ε ~ N(0, noise_sd²).
inline SyntheticDataset gen_synthetic(Eigen::Index n, Eigen::Index m, double noise_sd, std::uint64_t seed) {
    if (n < 1 || m < 1) throw InvalidArgument("gen_synthetic: N and M must be positive");
    if (!(noise_sd >= 0.0)) throw InvalidArgument("gen_synthetic: noise_sd must be nonnegative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    SyntheticDataset d;
    d.seed = seed;
    d.alpha_true.resize(m);
    d.beta_true.resize(m);
    for (auto& v : d.alpha_true) v = unif(rng);
    for (auto& v : d.beta_true) v = unif(rng);
    d.X.resize(n, 2 * m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < 2 * m; ++j) d.X(i, j) = unif(rng);
    Vector theta(2 * m);
    theta << d.alpha_true, d.beta_true;
    d.y = d.X * theta;
    if (noise_sd > 0.0) {
        std::normal_distribution<double> noise(0.0, noise_sd);
        for (auto& v : d.y) v += noise(rng);
    }
    return d;
}

namespace detail {

struct SyntheticData {
    Matrix X;
    Vector y;
    double lambda = 0.0;
    Eigen::Index m = 0;
    Matrix cross;  // X_αᵀ X_β
    Vector xty_alpha;
    Vector xty_beta;
    std::unique_ptr<FactorCache> alpha_hessian;  // 2X_αᵀX_α + 2λ1 I (+ weight I)
    std::unique_ptr<FactorCache> beta_hessian;
};

// Partner > 0 forces ≤ 0, partner < 0 forces ≥ 0, partner = 0 leaves it free.
inline CoordConstraints opposite_sign_constraints(const Vector& partner) {
    CoordConstraints cs(static_cast<std::size_t>(partner.size()), CoordConstraint::Free);
    for (Eigen::Index j = 0; j < partner.size(); ++j) {
        if (partner[j] > 0.0) cs[j] = CoordConstraint::NonPositive;
        else if (partner[j] < 0.0) cs[j] = CoordConstraint::NonNegative;
    }
    return cs;
}

}  // namespace detail

inline double synthetic_objective(const Matrix& x, const Vector& y, double lambda1, const Vector& alpha,
                                  const Vector& beta) {
    Vector theta(alpha.size() + beta.size());
    theta << alpha, beta;
    return (y - x * theta).squaredNorm() + lambda1 * theta.squaredNorm();
}

inline ProblemSpec build_synthetic_problem(const SyntheticDataset& d, double lambda1) {
    if (!(lambda1 > 0.0)) throw InvalidArgument("build_synthetic_problem: lambda1 must be positive");
    const Eigen::Index m = d.half_features();
    if (d.X.cols() != 2 * m || d.y.size() != d.X.rows())
        throw InvalidArgument("build_synthetic_problem: inconsistent dataset");

    auto data = std::make_shared<detail::SyntheticData>();
    data->X = d.X;
    data->y = d.y;
    data->lambda = lambda1;
    data->m = m;
    const auto xa = d.X.leftCols(m);
    const auto xb = d.X.rightCols(m);
    data->cross = xa.transpose() * xb;
    data->xty_alpha = xa.transpose() * d.y;
    data->xty_beta = xb.transpose() * d.y;
    Matrix ha = 2.0 * gram(Matrix(xa));
    ha.diagonal().array() += 2.0 * lambda1;
    Matrix hb = 2.0 * gram(Matrix(xb));
    hb.diagonal().array() += 2.0 * lambda1;
    data->alpha_hessian = std::make_unique<FactorCache>(std::move(ha));
    data->beta_hessian = std::make_unique<FactorCache>(std::move(hb));

    ProblemSpec spec;
    spec.z_dim = 2 * m;
    spec.smooth = SmoothTerm::zero();

    // α-block: min ‖y − X_α α − X_β β‖² + λ1‖α‖² + (w/2)‖α − t‖²
    spec.blocks.push_back({m, StackSelector{0}, [data](const BlockContext& ctx) {
                               const Vector& beta = ctx.blocks[1];
                               auto h = data->alpha_hessian->get(ctx.weight);
                               const Vector q = 2.0 * (data->xty_alpha - data->cross * beta) + ctx.penalty_linear();
                               return solve_sign_constrained(h->P, &h->factor, q, Vector(),
                                                             detail::opposite_sign_constraints(beta),
                                                             ctx.current(), ctx.sub_tol);
                           }});
    spec.blocks.push_back({m, StackSelector{m}, [data](const BlockContext& ctx) {
                               const Vector& alpha = ctx.blocks[0];
                               auto h = data->beta_hessian->get(ctx.weight);
                               const Vector q = 2.0 * (data->xty_beta - data->cross.transpose() * alpha)
                                                + ctx.penalty_linear();
                               return solve_sign_constrained(h->P, &h->factor, q, Vector(),
                                                             detail::opposite_sign_constraints(alpha),
                                                             ctx.current(), ctx.sub_tol);
                           }});

    spec.objective = [data](std::span<const Vector> x) {
        return synthetic_objective(data->X, data->y, data->lambda, x[0], x[1]);
    };
    spec.inequality = [](std::span<const Vector> x) { return Vector(x[0].cwiseProduct(x[1])); };
    spec.initial_point = {Vector::Zero(m), Vector::Zero(m)};
    return spec;
}

}  // namespace miadmm::problems
