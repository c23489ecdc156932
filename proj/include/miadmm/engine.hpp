#pragma once

// The miADMM iteration: Gauss–Seidel block sweep, z-update, dual ascent.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "miadmm/diagnostics.hpp"
#include "miadmm/errors.hpp"
#include "miadmm/problem.hpp"

namespace miadmm {

enum class SolveStatus { Converged, MaxIterReached, CertificateViolation };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxIterReached: return "max_iter_reached";
        case SolveStatus::CertificateViolation: return "certificate_violation";
    }
    return "unknown";
}

struct SolveReport {
    SolverState final;
    std::vector<IterationRecord> history;
    SolveStatus status = SolveStatus::MaxIterReached;
    std::string detail;  // which certificate failed, when status says so
    double initial_lagrangian = 0.0;
};

/// Called after every iteration with the new state and its record.
using IterationObserver = std::function<void(const SolverState&, const IterationRecord&)>;

namespace detail {

// Runs every block solver in ascending order against fixed (z, y). `weight` is ρ
// for miADMM and 0 for plain block coordinate descent.
inline void sweep_in_place(const ProblemSpec& spec, SolverState& state, double weight, double sub_tol) {
    Vector base = Vector::Zero(spec.z_dim);
    if (weight > 0.0) base = state.z - state.y / weight;
    Vector sum = coupled_sum(spec, state.x);
    Vector target(spec.z_dim);
    for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
        const BlockSpec& b = spec.blocks[i];
        target = base - sum;
        accumulate_coupling(b.coupling, state.x[i], 1.0, target);
        BlockContext ctx;
        ctx.index = i;
        ctx.blocks = state.x;
        ctx.coupling = &b.coupling;
        ctx.target = &target;
        ctx.weight = weight;
        ctx.sub_tol = sub_tol;
        Vector next;
        try {
            next = b.solve(ctx);
        } catch (const BlockSolveError&) {
            throw;
        } catch (const Error& e) {
            throw BlockSolveError(i, e.what());
        }
        if (next.size() != b.dim) throw BlockSolveError(i, "solver returned wrong dimension");
        accumulate_coupling(b.coupling, Vector(next - state.x[i]), 1.0, sum);
        state.x[i] = std::move(next);
    }
}

class ZUpdater {
public:
    ZUpdater(const ProblemSpec& spec, double rho) : spec_(&spec), rho_(rho) {
        if (spec.smooth.kind() == SmoothTerm::Kind::Quadratic) {
            Matrix m = spec.smooth.Q();
            m.diagonal().array() += rho;
            factor_ = SpdFactor(m);
        }
    }

    Vector operator()(const Vector& ax, const Vector& y) const {
        switch (spec_->smooth.kind()) {
            case SmoothTerm::Kind::Zero: return ax + y / rho_;
            case SmoothTerm::Kind::Quadratic: return factor_.solve(rho_ * ax + y - spec_->smooth.c());
            case SmoothTerm::Kind::Custom: return spec_->smooth.solver()(ax, y, rho_);
        }
        return ax;
    }

private:
    const ProblemSpec* spec_;
    double rho_;
    SpdFactor factor_;
};

}  // namespace detail

/// One Gauss–Seidel pass over the blocks; z and y are left untouched.
inline SolverState sweep_blocks(const ProblemSpec& spec, const SolverState& state, const SolverConfig& cfg) {
    SolverState next = state;
    detail::sweep_in_place(spec, next, cfg.rho, cfg.sub_tol);
    return next;
}

/// z ← argmin h(z) − yᵀz + (ρ/2)‖Σ A_i x_i − z‖².
inline SolverState update_z(const ProblemSpec& spec, const SolverState& state, const SolverConfig& cfg) {
    SolverState next = state;
    next.z = detail::ZUpdater(spec, cfg.rho)(coupled_sum(spec, state.x), state.y);
    return next;
}

/// y ← y + ρ(Σ A_i x_i − z), k ← k + 1.
inline SolverState update_dual(const ProblemSpec& spec, const SolverState& state, double rho) {
    SolverState next = state;
    next.y += rho * (coupled_sum(spec, state.x) - state.z);
    ++next.k;
    return next;
}

inline double primal_residual(const ProblemSpec& spec, const SolverState& state) {
    return (coupled_sum(spec, state.x) - state.z).norm();
}

inline bool has_converged(const IterationRecord& last, double tol) {
    return last.step_norm_sq <= tol && last.primal_residual <= std::sqrt(tol);
}

inline bool has_converged(std::span<const IterationRecord> history, double tol) {
    return !history.empty() && has_converged(history.back(), tol);
}

/// Runs miADMM from `start`. With diagnostics enabled the run requires ρ > 2H
/// and aborts with CertificateViolation as soon as a certificate fails.
inline SolveReport run(const ProblemSpec& spec, const SolverConfig& cfg, SolverState start,
                       const IterationObserver& observer = {}) {
    validate(spec);
    if (!(cfg.rho > 0.0)) throw InvalidArgument("rho must be positive");
    if (!(cfg.tol > 0.0)) throw InvalidArgument("tol must be positive");
    if (!(cfg.sub_tol > 0.0)) throw InvalidArgument("sub_tol must be positive");

    std::optional<DescentConstants> consts;
    if (cfg.diagnostics_enabled) consts = descent_constants(spec.smooth.lipschitz(), cfg.rho);
    const double H = spec.smooth.lipschitz();

    const auto t0 = std::chrono::steady_clock::now();
    const detail::ZUpdater z_update(spec, cfg.rho);

    SolveReport report;
    report.initial_lagrangian = augmented_lagrangian(spec, start, cfg.rho);
    report.history.reserve(std::min<std::size_t>(cfg.max_iter, 100000));
    SolverState& s = report.final;
    s = std::move(start);

    double lagrangian_prev = report.initial_lagrangian;
    double step_total = 0.0;
    std::optional<double> u;
    // The dual-step monitor rests on y = ∇h(z) holding at the previous state.
    bool identity_held = dual_identity_error(spec, s) <= 1e-8;

    auto fail = [&](std::string detail) {
        report.status = SolveStatus::CertificateViolation;
        report.detail = std::move(detail);
    };

    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
        const std::vector<Vector> x_prev = s.x;
        const Vector z_prev = s.z;
        const Vector y_prev = s.y;

        detail::sweep_in_place(spec, s, cfg.rho, cfg.sub_tol);
        const Vector ax = coupled_sum(spec, s.x);
        s.z = z_update(ax, s.y);
        s.y += cfg.rho * (ax - s.z);
        ++s.k;

        IterationRecord rec;
        rec.k = s.k;
        rec.objective = total_objective(spec, s.x, s.z);
        rec.lagrangian = augmented_lagrangian(spec, s, cfg.rho);
        rec.primal_residual = (ax - s.z).norm();
        double step = (s.z - z_prev).squaredNorm();
        for (std::size_t i = 0; i < s.x.size(); ++i)
            step += coupled_norm_sq(spec.blocks[i].coupling, s.x[i] - x_prev[i]);
        rec.step_norm_sq = step;
        u = update_u(u, step);
        rec.u_k = *u;
        rec.descent_lhs = lagrangian_prev - rec.lagrangian;
        rec.descent_rhs = consts ? consts->C2 * step : 0.0;
        rec.dual_identity_err = dual_identity_error(spec, s);
        if (cfg.record_timing)
            rec.wall_time_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        report.history.push_back(rec);
        if (observer) observer(s, rec);

        if (consts) {
            step_total += step;
            const std::string at = " at iteration " + std::to_string(rec.k);
            if (!std::isfinite(rec.lagrangian)) {
                fail("infeasible iterate" + at);
            } else if (max_abs_entry(s) > kBoundednessLimit) {
                fail("iterates exceed boundedness limit" + at);
            } else if (!check_sufficient_descent(lagrangian_prev, rec.lagrangian, step, *consts,
                                                 default_descent_slack(lagrangian_prev))) {
                fail("sufficient descent violated" + at);
            } else if (rec.dual_identity_err > 1e-8) {
                fail("dual identity y = grad h(z) violated" + at);
            } else if (identity_held && (s.y - y_prev).norm() > H * (s.z - z_prev).norm() + 1e-8) {
                fail("dual step exceeds H times z step" + at);
            } else if (step_total > (report.initial_lagrangian - rec.lagrangian) / consts->C2
                                        + 1e-6 * (1.0 + std::abs(report.initial_lagrangian))) {
                fail("summability bound violated" + at);
            }
            if (report.status == SolveStatus::CertificateViolation) return report;
        }
        lagrangian_prev = rec.lagrangian;
        identity_held = rec.dual_identity_err <= 1e-8;

        if (!cfg.fixed_iterations && has_converged(rec, cfg.tol)) {
            report.status = SolveStatus::Converged;
            return report;
        }
    }
    report.status = SolveStatus::MaxIterReached;
    return report;
}

inline SolveReport run(const ProblemSpec& spec, const SolverConfig& cfg, const IterationObserver& observer = {}) {
    return run(spec, cfg, initial_state(spec), observer);
}

}  // namespace miadmm
