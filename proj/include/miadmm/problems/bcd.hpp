#pragma once

// Block coordinate descent on the unsplit problem: each block is minimized
// exactly with the others fixed, with no auxiliary variable and no duals.

#include <chrono>
#include <optional>

#include "miadmm/diagnostics.hpp"
#include "miadmm/engine.hpp"

namespace miadmm::problems {

/// Stops when Σ‖A_i Δx_i‖² ≤ cfg.tol. The reported lagrangian column holds the
/// objective (+∞ if infeasible) and z tracks Σ A_i x_i with y = 0.
inline SolveReport bcd_solve(const ProblemSpec& spec, const SolverConfig& cfg, const IterationObserver& observer = {}) {
    validate(spec);
    if (spec.smooth.kind() != SmoothTerm::Kind::Zero)
        throw InvalidArgument("bcd_solve: only problems with a zero smooth term are supported");
    if (!(cfg.tol > 0.0) || !(cfg.sub_tol > 0.0)) throw InvalidArgument("bcd_solve: tolerances must be positive");

    const auto t0 = std::chrono::steady_clock::now();
    SolveReport report;
    SolverState& s = report.final;
    s.x = spec.initial_point;
    s.z = coupled_sum(spec, s.x);
    s.y = Vector::Zero(spec.z_dim);
    auto objective_at = [&](const SolverState& st) {
        return max_violation(spec, st.x) > kFeasibilitySlack ? std::numeric_limits<double>::infinity()
                                                             : spec.objective(st.x);
    };
    report.initial_lagrangian = objective_at(s);
    double prev = report.initial_lagrangian;
    std::optional<double> u;

    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
        const std::vector<Vector> x_prev = s.x;
        detail::sweep_in_place(spec, s, 0.0, cfg.sub_tol);
        s.z = coupled_sum(spec, s.x);
        ++s.k;

        IterationRecord rec;
        rec.k = s.k;
        rec.objective = spec.objective(s.x);
        rec.lagrangian = objective_at(s);
        double step = 0.0;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            step += coupled_norm_sq(spec.blocks[i].coupling, s.x[i] - x_prev[i]);
        rec.step_norm_sq = step;
        u = update_u(u, step);
        rec.u_k = *u;
        rec.descent_lhs = prev - rec.lagrangian;
        if (cfg.record_timing)
            rec.wall_time_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        report.history.push_back(rec);
        if (observer) observer(s, rec);
        prev = rec.lagrangian;

        if (!cfg.fixed_iterations && step <= cfg.tol) {
            report.status = SolveStatus::Converged;
            return report;
        }
    }
    report.status = SolveStatus::MaxIterReached;
    return report;
}

}  // namespace miadmm::problems
