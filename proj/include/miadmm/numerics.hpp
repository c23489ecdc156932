#pragma once

// Dense linear-algebra substrate shared by the subsolvers and problem builders.
// Storage is Eigen, row-major for matrices.

#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "miadmm/errors.hpp"

namespace miadmm {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

template <class Derived>
inline bool all_finite(const Eigen::DenseBase<Derived>& a) {
    return a.derived().array().isFinite().all();
}

/// Returns AᵀA, stored exactly symmetric.
inline Matrix gram(const Matrix& a) {
    if (a.size() == 0) throw InvalidArgument("gram: empty matrix");
    Matrix g = Matrix::Zero(a.cols(), a.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return g;
}

inline bool is_symmetric(const Matrix& p, double rel_tol = 1e-10) {
    if (p.rows() != p.cols()) return false;
    const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
    return (p - p.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// Cholesky factor of P + jitter·I. If the first attempt fails the jitter is
/// raised once by 1e-10·trace(P)/dim; a second failure throws.
class SpdFactor {
public:
    SpdFactor() = default;

    explicit SpdFactor(const Matrix& p, double jitter = 0.0) {
        if (p.rows() != p.cols() || p.rows() == 0)
            throw InvalidArgument("SpdFactor: matrix must be square and nonempty");
        if (!is_symmetric(p)) throw InvalidArgument("SpdFactor: matrix is not symmetric");
        if (!factor(p, jitter)) {
            const double bump = 1e-10 * p.trace() / static_cast<double>(p.rows());
            if (!(bump > 0.0) || !factor(p, jitter + bump))
                throw NotPositiveDefinite("Cholesky factorization failed");
        }
    }

    Vector solve(const Vector& q) const {
        if (q.size() != llt_.rows()) throw InvalidArgument("SpdFactor::solve: dimension mismatch");
        return llt_.solve(q);
    }

    /// Solves X·(P + jitter·I) = B for X, i.e. right division by the factored matrix.
    Matrix solve_right(const Matrix& b) const {
        Matrix xt = llt_.solve(b.transpose());
        return xt.transpose();
    }

    Eigen::Index dim() const { return llt_.rows(); }
    double jitter() const { return jitter_; }

private:
    bool factor(const Matrix& p, double jitter) {
        Matrix shifted = p;
        shifted.diagonal().array() += jitter;
        llt_.compute(shifted);
        jitter_ = jitter;
        if (llt_.info() != Eigen::Success) return false;
        // LLT does not report tiny/negative pivots reliably on semidefinite input.
        const auto d = llt_.matrixLLT().diagonal();
        return (d.array() > 0.0).all() && d.array().isFinite().all();
    }

    Eigen::LLT<Matrix> llt_;
    double jitter_ = 0.0;
};

inline Vector solve_spd(const Matrix& p, const Vector& q, double jitter = 0.0) {
    if (q.size() != p.rows()) throw InvalidArgument("solve_spd: dimension mismatch");
    return SpdFactor(p, jitter).solve(q);
}

/// Largest eigenvalue of a symmetric matrix.
inline double largest_eigenvalue(const Matrix& q) {
    if (q.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(q, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

// Text fixture format: "rows cols" on the first line, then one row per line.

inline Matrix read_matrix(std::istream& in) {
    long rows = -1;
    long cols = -1;
    if (!(in >> rows >> cols) || rows < 0 || cols < 0)
        throw InvalidArgument("read_matrix: bad header");
    Matrix m(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j)
            if (!(in >> m(i, j)))
                throw InvalidArgument("read_matrix: expected " + std::to_string(rows * cols)
                                      + " entries");
    if (!all_finite(m)) throw InvalidArgument("read_matrix: non-finite entry");
    return m;
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
    out << m.rows() << ' ' << m.cols() << '\n';
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            out << m(i, j);
        }
        out << '\n';
    }
    out.precision(old);
}

inline Matrix parse_matrix(const std::string& text) {
    std::istringstream in(text);
    return read_matrix(in);
}

}  // namespace miadmm
