#pragma once

// Runtime certificates for the convergence theory of miADMM: the augmented
// Lagrangian, the sufficient-descent inequality, the running minimum u_k of the
// squared step norms and its summability bound.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "miadmm/errors.hpp"
#include "miadmm/problem.hpp"

namespace miadmm {

/// Slack used when evaluating the indicator of l(x) ≤ 0.
inline constexpr double kFeasibilitySlack = 1e-12;

/// Threshold on ‖iterates‖∞ above which a certified run is declared unbounded.
inline constexpr double kBoundednessLimit = 1e8;

struct IterationRecord {
    std::size_t k = 0;
    double objective = 0.0;
    double lagrangian = 0.0;
    double primal_residual = 0.0;
    double step_norm_sq = 0.0;  // ‖z^{k+1} − z^k‖² + Σ‖A_i(x_i^{k+1} − x_i^k)‖²
    double u_k = 0.0;
    double descent_lhs = 0.0;   // L^k − L^{k+1}
    double descent_rhs = 0.0;   // C2 · step_norm_sq
    double dual_identity_err = 0.0;  // ‖y − ∇h(z)‖∞
    double wall_time_ms = 0.0;
};

struct DescentConstants {
    double H = 0.0;
    double rho = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
};

/// L_ρ(x, z, y); +∞ when some component of l(x) exceeds kFeasibilitySlack.
inline double augmented_lagrangian(const ProblemSpec& spec, const SolverState& state, double rho) {
    if (max_violation(spec, state.x) > kFeasibilitySlack) return std::numeric_limits<double>::infinity();
    const Vector r = coupled_sum(spec, state.x) - state.z;
    return spec.objective(state.x) + spec.smooth.value(state.z) + state.y.dot(r)
           + 0.5 * rho * r.squaredNorm();
}

/// C1 = ρ/2 − H/2 − H²/ρ and C2 = min(ρ/2, C1); requires ρ > 2H.
inline DescentConstants descent_constants(double H, double rho) {
    if (!(rho > 0.0) || !(H >= 0.0)) throw InvalidArgument("descent_constants: need rho > 0, H >= 0");
    if (!(rho > 2.0 * H)) throw RhoTooSmall(rho, 2.0 * H);
    DescentConstants c;
    c.H = H;
    c.rho = rho;
    c.C1 = rho / 2.0 - H / 2.0 - H * H / rho;
    c.C2 = std::min(rho / 2.0, c.C1);
    return c;
}

inline double default_descent_slack(double lagrangian_prev) {
    return 1e-8 * (1.0 + std::abs(lagrangian_prev));
}

/// L^k − L^{k+1} ≥ C2 · step_norm_sq − slack.
inline bool check_sufficient_descent(double lagrangian_prev, double lagrangian_next, double step_norm_sq,
                                     const DescentConstants& consts, double slack) {
    if (!std::isfinite(lagrangian_prev) || !std::isfinite(lagrangian_next)) return false;
    return lagrangian_prev - lagrangian_next >= consts.C2 * step_norm_sq - slack;
}

inline bool check_sufficient_descent(const IterationRecord& prev, const IterationRecord& next,
                                     const DescentConstants& consts) {
    return check_sufficient_descent(prev.lagrangian, next.lagrangian, next.step_norm_sq, consts,
                                    default_descent_slack(prev.lagrangian));
}

inline double update_u(std::optional<double> prev_u, double step_norm_sq) {
    return prev_u ? std::min(*prev_u, step_norm_sq) : step_norm_sq;
}

/// Σ step_norm_sq ≤ (L0 − Lk)/C2 + 1e-6·(1 + |L0|).
inline bool summability_check(std::span<const IterationRecord> history, const DescentConstants& consts,
                              double lagrangian_0, double lagrangian_k) {
    double total = 0.0;
    for (const auto& r : history) total += r.step_norm_sq;
    if (history.empty()) return true;
    if (!std::isfinite(lagrangian_0) || !std::isfinite(lagrangian_k)) return false;
    return total <= (lagrangian_0 - lagrangian_k) / consts.C2 + 1e-6 * (1.0 + std::abs(lagrangian_0));
}

/// The sequence (k, k·u_k), whose decay to zero is the o(1/k) rate.
inline std::vector<std::pair<std::size_t, double>> rate_proxy(std::span<const IterationRecord> history) {
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(history.size());
    for (const auto& r : history) out.emplace_back(r.k, static_cast<double>(r.k) * r.u_k);
    return out;
}

/// Finite-horizon check: max of k·u_k over the second half of the run does not
/// exceed its max over the first half.
inline bool rate_proxy_holds(std::span<const IterationRecord> history) {
    const auto seq = rate_proxy(history);
    if (seq.size() < 2) return true;
    const std::size_t half = seq.size() / 2;
    double first = 0.0;
    double second = 0.0;
    for (std::size_t i = 0; i < half; ++i) first = std::max(first, seq[i].second);
    for (std::size_t i = half; i < seq.size(); ++i) second = std::max(second, seq[i].second);
    return second <= first;
}

inline double max_abs_entry(const SolverState& s) {
    double m = s.z.size() ? s.z.cwiseAbs().maxCoeff() : 0.0;
    if (s.y.size()) m = std::max(m, s.y.cwiseAbs().maxCoeff());
    for (const auto& x : s.x)
        if (x.size()) m = std::max(m, x.cwiseAbs().maxCoeff());
    return m;
}

inline double dual_identity_error(const ProblemSpec& spec, const SolverState& s) {
    const Vector d = s.y - spec.smooth.gradient(s.z);
    return d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace miadmm
