#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>

#include "miadmm/numerics.hpp"
#include "miadmm/subsolvers.hpp"

namespace miadmm::problems {

/// Block Hessians of the form base + weight·I, factored once per weight.
/// Shared between concurrent solves, hence the lock.
class FactorCache {
public:
    struct Entry {
        Matrix P;
        SpdFactor factor;
    };

    explicit FactorCache(Matrix base) : base_(std::move(base)) {}

    std::shared_ptr<const Entry> get(double weight) const {
        std::lock_guard lock(mu_);
        auto it = cache_.find(weight);
        if (it != cache_.end()) return it->second;
        auto e = std::make_shared<Entry>();
        e->P = base_;
        e->P.diagonal().array() += weight;
        e->factor = SpdFactor(e->P);
        cache_.emplace(weight, e);
        return e;
    }

    const Matrix& base() const { return base_; }

private:
    Matrix base_;
    mutable std::mutex mu_;
    mutable std::map<double, std::shared_ptr<const Entry>> cache_;
};

/// Exact block solve: warm start from the better of the clamped unconstrained
/// minimizer and the previous value, then coordinate descent.
inline Vector solve_sign_constrained(const Matrix& p, const SpdFactor* factor, const Vector& q, const Vector& l1,
                                     const CoordConstraints& cs, const Vector& previous, double tol) {
    Vector x0 = factor ? choose_warm_start(p, *factor, q, l1, cs, previous) : clamp_to(cs, previous);
    return cd_solve_quadratic(p, q, l1, cs, std::move(x0), tol).x;
}

/// Solves the column-separable problem min Σ_c ½x_cᵀPx_c − rhs_cᵀx_c + γ‖x_c‖₁
/// with one constraint type on every entry. Columns of `previous` are warm starts.
inline Matrix solve_columns(const Matrix& p, const Matrix& rhs, double l1, CoordConstraint c,
                            const Matrix& previous, double tol) {
    std::optional<SpdFactor> factor;
    try {
        factor.emplace(p);
    } catch (const NotPositiveDefinite&) {
        // Singular P (e.g. an unregularized all-zero factor): plain coordinate descent.
    }
    const CoordConstraints cs(static_cast<std::size_t>(p.rows()), c);
    const Vector weights = l1 > 0.0 ? Vector::Constant(p.rows(), l1) : Vector();
    Matrix out(rhs.rows(), rhs.cols());
    for (Eigen::Index j = 0; j < rhs.cols(); ++j)
        out.col(j) = solve_sign_constrained(p, factor ? &*factor : nullptr, rhs.col(j), weights, cs,
                                            previous.col(j), tol);
    return out;
}

inline Eigen::Map<const Matrix> as_matrix(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
    return {v.data(), rows, cols};
}

inline Vector flatten(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace miadmm::problems
