#pragma once

#include <cmath>

#include "miadmm/errors.hpp"
#include "miadmm/numerics.hpp"

namespace miadmm::problems {

struct RegressionMetrics {
    double mse = 0.0;
    double msle = 0.0;
    double mae = 0.0;
    double ev = 0.0;  // explained variance
    double r2 = 0.0;
};

namespace detail {

// 1 − num/den, taking 0/0 as a perfect score and x/0 as zero.
inline double one_minus_ratio(double num, double den) {
    if (den == 0.0) return num == 0.0 ? 1.0 : 0.0;
    return 1.0 - num / den;
}

}  // namespace detail

/// MSLE uses log(1 + ·) and is undefined for values ≤ −1.
inline RegressionMetrics regression_metrics(const Vector& y_true, const Vector& y_pred) {
    if (y_true.size() != y_pred.size() || y_true.size() < 2)
        throw InvalidArgument("regression_metrics: need equal lengths >= 2");
    if ((y_true.array() <= -1.0).any() || (y_pred.array() <= -1.0).any())
        throw DomainError("regression_metrics: MSLE undefined for values <= -1");
    const double n = static_cast<double>(y_true.size());
    const Vector err = y_true - y_pred;
    RegressionMetrics m;
    m.mse = err.squaredNorm() / n;
    m.mae = err.cwiseAbs().sum() / n;
    m.msle = (y_true.array().log1p() - y_pred.array().log1p()).square().sum() / n;
    const double var_true = (y_true.array() - y_true.mean()).square().sum() / n;
    const double var_err = (err.array() - err.mean()).square().sum() / n;
    m.ev = detail::one_minus_ratio(var_err, var_true);
    m.r2 = detail::one_minus_ratio(err.squaredNorm() / n, var_true);
    return m;
}

}  // namespace miadmm::problems
