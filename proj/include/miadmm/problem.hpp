#pragma once

// Problem description consumed by the miADMM engine:
//
//   min f(x_1..x_n) + Σ g_i(x_i) + h(z)   s.t.  l(x_1..x_n) ≤ 0,  Σ A_i x_i = z
//
// Each block carries its coupling A_i and an exact solver for its subproblem.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "miadmm/errors.hpp"
#include "miadmm/numerics.hpp"

namespace miadmm {

/// A_i embeds x_i into z[offset, offset + dim).
struct StackSelector {
    Eigen::Index offset = 0;
};

/// A_i given explicitly as a z_dim × dim matrix with full column rank.
struct DenseCoupling {
    Matrix A;
};

using Coupling = std::variant<StackSelector, DenseCoupling>;

inline Vector apply_coupling(const Coupling& c, const Vector& x, Eigen::Index z_dim) {
    if (const auto* s = std::get_if<StackSelector>(&c)) {
        Vector out = Vector::Zero(z_dim);
        out.segment(s->offset, x.size()) = x;
        return out;
    }
    return std::get<DenseCoupling>(c).A * x;
}

/// acc += sign · A x without materializing A for stacked blocks.
inline void accumulate_coupling(const Coupling& c, const Vector& x, double sign, Vector& acc) {
    if (const auto* s = std::get_if<StackSelector>(&c)) {
        acc.segment(s->offset, x.size()) += sign * x;
    } else {
        acc.noalias() += sign * (std::get<DenseCoupling>(c).A * x);
    }
}

inline double coupled_norm_sq(const Coupling& c, const Vector& dx) {
    if (std::holds_alternative<StackSelector>(c)) return dx.squaredNorm();
    return (std::get<DenseCoupling>(c).A * dx).squaredNorm();
}

/// What a block solver sees. The block must return
///   argmin_{x_i} f(.., x_i, ..) + g_i(x_i) + (weight/2)‖A_i x_i − target‖²
///   subject to l(.., x_i, ..) ≤ 0
/// with all other blocks fixed at `blocks`. In miADMM weight = ρ and
/// target = z − y/ρ − Σ_{j≠i} A_j x_j; the BCD baseline passes weight = 0.
struct BlockContext {
    std::size_t index = 0;
    std::span<const Vector> blocks;
    const Coupling* coupling = nullptr;
    const Vector* target = nullptr;
    double weight = 0.0;
    double sub_tol = 1e-10;

    const Vector& current() const { return blocks[index]; }

    /// Target restricted to this block's coordinates (stacked coupling only).
    Vector local_target() const {
        const auto* s = std::get_if<StackSelector>(coupling);
        if (!s) throw InvalidArgument("local_target requires a stacked coupling");
        return target->segment(s->offset, current().size());
    }

    /// weight · A_iᵀA_i
    Matrix penalty_hessian() const {
        const Eigen::Index p = current().size();
        if (std::holds_alternative<StackSelector>(*coupling))
            return weight * Matrix::Identity(p, p);
        return weight * gram(std::get<DenseCoupling>(*coupling).A);
    }

    /// weight · A_iᵀ target
    Vector penalty_linear() const {
        if (std::holds_alternative<StackSelector>(*coupling)) return weight * local_target();
        return weight * (std::get<DenseCoupling>(*coupling).A.transpose() * *target);
    }
};

using BlockSolver = std::function<Vector(const BlockContext&)>;

struct BlockSpec {
    Eigen::Index dim = 0;
    Coupling coupling;
    BlockSolver solve;
};

/// The smooth term h(z) with Lipschitz constant H of ∇h.
class SmoothTerm {
public:
    enum class Kind { Zero, Quadratic, Custom };

    using ValueFn = std::function<double(const Vector&)>;
    using GradientFn = std::function<Vector(const Vector&)>;
    /// argmin_z h(z) − yᵀz + (ρ/2)‖v − z‖², called as (v, y, ρ).
    using SolveFn = std::function<Vector(const Vector&, const Vector&, double)>;

    static SmoothTerm zero() { return SmoothTerm{}; }

    /// h(z) = ½zᵀQz + cᵀz; H is the largest eigenvalue of Q.
    static SmoothTerm quadratic(Matrix q, Vector c) {
        if (q.rows() != q.cols() || c.size() != q.rows())
            throw InvalidArgument("SmoothTerm::quadratic: inconsistent dimensions");
        if (!is_symmetric(q)) throw InvalidArgument("SmoothTerm::quadratic: Q not symmetric");
        SpdFactor check(q);  // throws NotPositiveDefinite
        SmoothTerm t;
        t.kind_ = Kind::Quadratic;
        t.lipschitz_ = std::max(0.0, largest_eigenvalue(q));
        t.q_ = std::move(q);
        t.c_ = std::move(c);
        return t;
    }

    static SmoothTerm custom(ValueFn value, GradientFn gradient, SolveFn solve, double lipschitz) {
        if (!(lipschitz >= 0.0)) throw InvalidArgument("SmoothTerm::custom: H must be nonnegative");
        SmoothTerm t;
        t.kind_ = Kind::Custom;
        t.value_ = std::move(value);
        t.gradient_ = std::move(gradient);
        t.solve_ = std::move(solve);
        t.lipschitz_ = lipschitz;
        return t;
    }

    Kind kind() const { return kind_; }
    double lipschitz() const { return lipschitz_; }
    const Matrix& Q() const { return q_; }
    const Vector& c() const { return c_; }
    const SolveFn& solver() const { return solve_; }

    double value(const Vector& z) const {
        switch (kind_) {
            case Kind::Zero: return 0.0;
            case Kind::Quadratic: return 0.5 * z.dot(q_ * z) + c_.dot(z);
            case Kind::Custom: return value_(z);
        }
        return 0.0;
    }

    Vector gradient(const Vector& z) const {
        switch (kind_) {
            case Kind::Zero: return Vector::Zero(z.size());
            case Kind::Quadratic: return q_ * z + c_;
            case Kind::Custom: return gradient_(z);
        }
        return Vector::Zero(z.size());
    }

private:
    Kind kind_ = Kind::Zero;
    double lipschitz_ = 0.0;
    Matrix q_;
    Vector c_;
    ValueFn value_;
    GradientFn gradient_;
    SolveFn solve_;
};

struct ProblemSpec {
    std::vector<BlockSpec> blocks;
    Eigen::Index z_dim = 0;
    SmoothTerm smooth;
    /// f(x_1..x_n) + Σ g_i(x_i); h(z) is added by total_objective.
    std::function<double(std::span<const Vector>)> objective;
    /// Components of l(x_1..x_n); feasible iff every component is ≤ 0.
    std::function<Vector(std::span<const Vector>)> inequality;
    std::vector<Vector> initial_point;
};

inline Vector coupled_sum(const ProblemSpec& spec, std::span<const Vector> x) {
    Vector s = Vector::Zero(spec.z_dim);
    for (std::size_t i = 0; i < spec.blocks.size(); ++i)
        accumulate_coupling(spec.blocks[i].coupling, x[i], 1.0, s);
    return s;
}

inline double total_objective(const ProblemSpec& spec, std::span<const Vector> x, const Vector& z) {
    return spec.objective(x) + spec.smooth.value(z);
}

/// Largest component of l(x), or −∞ when there are no constraints.
inline double max_violation(const ProblemSpec& spec, std::span<const Vector> x) {
    if (!spec.inequality) return -std::numeric_limits<double>::infinity();
    const Vector l = spec.inequality(x);
    return l.size() ? l.maxCoeff() : -std::numeric_limits<double>::infinity();
}

struct SolverState {
    std::vector<Vector> x;
    Vector z;
    Vector y;
    std::size_t k = 0;
};

/// z⁰ = Σ A_i x_i⁰ and y⁰ = ∇h(z⁰), which is 0 whenever h ≡ 0. Starting on
/// y = ∇h(z) keeps that identity true from the first iteration on.
inline SolverState initial_state(const ProblemSpec& spec) {
    SolverState s;
    s.x = spec.initial_point;
    s.z = coupled_sum(spec, s.x);
    s.y = spec.smooth.gradient(s.z);
    return s;
}

struct SolverConfig {
    double rho = 0.1;
    std::size_t max_iter = 1000;
    double tol = 1e-10;       // on the squared step norm; primal residual uses √tol
    double sub_tol = 1e-10;   // KKT tolerance handed to block solvers
    bool diagnostics_enabled = true;
    bool record_timing = true;
    bool fixed_iterations = false;  // run exactly max_iter iterations, ignoring tol
    std::uint64_t seed = 0;
};

/// Throws InvalidArgument describing the first broken invariant.
inline void validate(const ProblemSpec& spec) {
    if (spec.blocks.empty()) throw InvalidArgument("problem has no blocks");
    if (spec.z_dim <= 0) throw InvalidArgument("z_dim must be positive");
    if (!spec.objective) throw InvalidArgument("problem has no objective");
    if (spec.initial_point.size() != spec.blocks.size())
        throw InvalidArgument("initial point has wrong number of blocks");

    std::vector<char> covered(static_cast<std::size_t>(spec.z_dim), 0);
    bool all_stacked = true;
    for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
        const BlockSpec& b = spec.blocks[i];
        const std::string tag = "block " + std::to_string(i) + ": ";
        if (b.dim <= 0) throw InvalidArgument(tag + "dimension must be positive");
        if (!b.solve) throw InvalidArgument(tag + "missing solver");
        if (spec.initial_point[i].size() != b.dim)
            throw InvalidArgument(tag + "initial point has wrong dimension");
        if (!all_finite(spec.initial_point[i])) throw InvalidArgument(tag + "non-finite initial point");
        if (const auto* s = std::get_if<StackSelector>(&b.coupling)) {
            if (s->offset < 0 || s->offset + b.dim > spec.z_dim)
                throw InvalidArgument(tag + "stacked range outside z");
            for (Eigen::Index j = s->offset; j < s->offset + b.dim; ++j) {
                if (covered[static_cast<std::size_t>(j)]) throw InvalidArgument(tag + "stacked ranges overlap");
                covered[static_cast<std::size_t>(j)] = 1;
            }
        } else {
            all_stacked = false;
            const Matrix& a = std::get<DenseCoupling>(b.coupling).A;
            if (a.rows() != spec.z_dim || a.cols() != b.dim)
                throw InvalidArgument(tag + "coupling matrix has wrong shape");
            if (Eigen::ColPivHouseholderQR<Matrix>(a).rank() < b.dim)
                throw InvalidArgument(tag + "coupling matrix lacks full column rank");
        }
    }
    if (all_stacked)
        for (char c : covered)
            if (!c) throw InvalidArgument("stacked blocks do not cover z");
    if (max_violation(spec, spec.initial_point) > 0.0)
        throw InvalidArgument("initial point violates the inequality constraints");
}

}  // namespace miadmm
