#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "miadmm/diagnostics.hpp"
#include "miadmm/engine.hpp"
#include "miadmm/problems/synthetic.hpp"
#include "toy_problems.hpp"

using miadmm::IterationRecord;
using miadmm::SolverState;
using miadmm::Vector;

namespace {

SolverState scalar_state(double x, double z, double y) {
    SolverState s;
    s.x = {Vector{{x}}};
    s.z = Vector{{z}};
    s.y = Vector{{y}};
    return s;
}

std::vector<IterationRecord> records(std::initializer_list<double> steps) {
    std::vector<IterationRecord> h;
    std::optional<double> u;
    std::size_t k = 0;
    for (double s : steps) {
        IterationRecord r;
        r.k = ++k;
        r.step_norm_sq = s;
        u = miadmm::update_u(u, s);
        r.u_k = *u;
        h.push_back(r);
    }
    return h;
}

}  // namespace

TEST(AugmentedLagrangian, ZeroResidual) {
    const auto spec = toy::ridge_to_origin(1);
    EXPECT_DOUBLE_EQ(miadmm::augmented_lagrangian(spec, scalar_state(1, 1, 0), 2.0), 0.5);
}

TEST(AugmentedLagrangian, DualAndPenaltyTerms) {
    const auto spec = toy::ridge_to_origin(1);
    EXPECT_DOUBLE_EQ(miadmm::augmented_lagrangian(spec, scalar_state(1, 0, 1), 2.0), 2.5);
}

TEST(AugmentedLagrangian, InfeasibleIsInfinite) {
    auto spec = toy::ridge_to_origin(1);
    spec.inequality = [](std::span<const Vector> x) { return Vector{{x[0][0] - 0.5}}; };
    EXPECT_EQ(miadmm::augmented_lagrangian(spec, scalar_state(1, 1, 0), 2.0),
              std::numeric_limits<double>::infinity());
    // Within the feasibility slack the point still counts as feasible.
    EXPECT_TRUE(std::isfinite(miadmm::augmented_lagrangian(spec, scalar_state(0.5 + 1e-13, 0, 0), 2.0)));
}

TEST(DescentConstants, ZeroLipschitz) {
    const auto c = miadmm::descent_constants(0.0, 0.1);
    EXPECT_DOUBLE_EQ(c.C1, 0.05);
    EXPECT_DOUBLE_EQ(c.C2, 0.05);
}

TEST(DescentConstants, PositiveLipschitz) {
    const auto c = miadmm::descent_constants(0.4, 1.0);
    EXPECT_NEAR(c.C1, 0.14, 1e-15);
    EXPECT_NEAR(c.C2, 0.14, 1e-15);
}

TEST(DescentConstants, BoundaryRhoRejected) {
    try {
        miadmm::descent_constants(1.0, 2.0);
        FAIL() << "expected RhoTooSmall";
    } catch (const miadmm::RhoTooSmall& e) {
        EXPECT_EQ(e.rho, 2.0);
        EXPECT_EQ(e.two_h, 2.0);
    }
}

TEST(SufficientDescent, StationaryPointPasses) {
    const auto c = miadmm::descent_constants(0.0, 0.1);
    EXPECT_TRUE(miadmm::check_sufficient_descent(3.0, 3.0, 0.0, c, 0.0));
}

TEST(SufficientDescent, IncreasingLagrangianFails) {
    const auto c = miadmm::descent_constants(0.0, 0.1);
    IterationRecord a;
    IterationRecord b;
    a.lagrangian = 1.0;
    b.lagrangian = 1.5;
    b.step_norm_sq = 0.0;
    EXPECT_FALSE(miadmm::check_sufficient_descent(a, b, c));
}

TEST(SufficientDescent, HoldsAlongSyntheticRun) {
    const auto d = miadmm::problems::gen_synthetic(50, 5, 0.1, 7);
    const auto spec = miadmm::problems::build_synthetic_problem(d, 1.0);
    miadmm::SolverConfig cfg;
    const auto rep = miadmm::run(spec, cfg);
    ASSERT_NE(rep.status, miadmm::SolveStatus::CertificateViolation) << rep.detail;
    const auto c = miadmm::descent_constants(0.0, cfg.rho);
    double prev = rep.initial_lagrangian;
    for (const auto& r : rep.history) {
        EXPECT_TRUE(miadmm::check_sufficient_descent(prev, r.lagrangian, r.step_norm_sq, c,
                                                     miadmm::default_descent_slack(prev)));
        EXPECT_LE(r.lagrangian, prev + miadmm::default_descent_slack(prev));
        prev = r.lagrangian;
    }
    EXPECT_TRUE(miadmm::summability_check(rep.history, c, rep.initial_lagrangian, rep.history.back().lagrangian));
    for (const auto& r : rep.history) EXPECT_GE(r.lagrangian, rep.history.back().lagrangian);
}

TEST(UpdateU, RunningMinimum) {
    const auto h = records({4, 1, 2});
    EXPECT_EQ(h[0].u_k, 4);
    EXPECT_EQ(h[1].u_k, 1);
    EXPECT_EQ(h[2].u_k, 1);
}

TEST(UpdateU, ZerosStayZero) {
    for (const auto& r : records({0, 0, 0})) EXPECT_EQ(r.u_k, 0);
}

TEST(UpdateU, DecreasingStepsAreTheirOwnMinimum) {
    for (const auto& r : records({5, 3, 2, 1})) EXPECT_EQ(r.u_k, r.step_norm_sq);
}

TEST(Summability, EmptyHistoryPasses) {
    const auto c = miadmm::descent_constants(0.0, 0.1);
    EXPECT_TRUE(miadmm::summability_check({}, c, 0.0, 0.0));
}

TEST(Summability, FabricatedViolationFails) {
    const auto c = miadmm::descent_constants(0.0, 0.1);
    // Steps total 2 but L fell by only 0.01: (L0 − Lk)/C2 = 0.2 < 2.
    const auto h = records({1, 1});
    EXPECT_FALSE(miadmm::summability_check(h, c, 1.0, 0.99));
}

TEST(RateProxy, InverseSquareDecays) {
    std::vector<IterationRecord> h;
    for (std::size_t k = 1; k <= 100; ++k) {
        IterationRecord r;
        r.k = k;
        r.u_k = 1.0 / static_cast<double>(k * k);
        h.push_back(r);
    }
    const auto seq = miadmm::rate_proxy(h);
    for (std::size_t i = 0; i < seq.size(); ++i) EXPECT_NEAR(seq[i].second, 1.0 / static_cast<double>(i + 1), 1e-15);
    EXPECT_TRUE(miadmm::rate_proxy_holds(h));
}

TEST(RateProxy, ConstantSequenceFails) {
    std::vector<IterationRecord> h;
    for (std::size_t k = 1; k <= 100; ++k) {
        IterationRecord r;
        r.k = k;
        r.u_k = 0.3;
        h.push_back(r);
    }
    EXPECT_FALSE(miadmm::rate_proxy_holds(h));
}

TEST(Certificates, AscentStepAborts) {
    auto spec = toy::ridge_to_origin(1);
    spec.blocks[0].solve = [](const miadmm::BlockContext& ctx) { return Vector(ctx.current().array() + 1.0); };
    const auto rep = miadmm::run(spec, miadmm::SolverConfig{});
    EXPECT_EQ(rep.status, miadmm::SolveStatus::CertificateViolation);
    EXPECT_NE(rep.detail.find("sufficient descent"), std::string::npos);
    EXPECT_EQ(rep.history.size(), 1u);
}

TEST(Certificates, InfeasibleIterateAborts) {
    auto spec = toy::ridge_to_origin(1);
    spec.inequality = [](std::span<const Vector> x) { return Vector{{x[0][0]}}; };
    spec.blocks[0].solve = [](const miadmm::BlockContext&) { return Vector{{1.0}}; };
    const auto rep = miadmm::run(spec, miadmm::SolverConfig{});
    EXPECT_EQ(rep.status, miadmm::SolveStatus::CertificateViolation);
    EXPECT_NE(rep.detail.find("infeasible"), std::string::npos);
}

TEST(Certificates, UnboundedIterateAborts) {
    auto spec = toy::ridge_to_origin(1);
    spec.objective = [](std::span<const Vector>) { return 0.0; };
    spec.blocks[0].solve = [](const miadmm::BlockContext&) { return Vector{{1e9}}; };
    const auto rep = miadmm::run(spec, miadmm::SolverConfig{});
    EXPECT_EQ(rep.status, miadmm::SolveStatus::CertificateViolation);
    EXPECT_NE(rep.detail.find("boundedness"), std::string::npos);
}

TEST(Certificates, DiagnosticsOffRunsThrough) {
    auto spec = toy::ridge_to_origin(1);
    spec.blocks[0].solve = [](const miadmm::BlockContext& ctx) { return Vector(ctx.current().array() + 1.0); };
    miadmm::SolverConfig c;
    c.diagnostics_enabled = false;
    c.max_iter = 5;
    const auto rep = miadmm::run(spec, c);
    EXPECT_EQ(rep.status, miadmm::SolveStatus::MaxIterReached);
    EXPECT_EQ(rep.history.size(), 5u);
}

TEST(DualMonitor, QuadraticSmoothTermDualStepBounded) {
    const auto spec = toy::quadratic_h_default();
    miadmm::SolverConfig c;
    c.rho = 2.0;
    SolverState prev = miadmm::initial_state(spec);
    const double h = spec.smooth.lipschitz();
    EXPECT_LT(h, 0.5);
    const auto rep = miadmm::run(spec, c, [&](const SolverState& s, const IterationRecord&) {
        EXPECT_LE((s.y - prev.y).norm(), h * (s.z - prev.z).norm() + 1e-8);
        prev = s;
    });
    EXPECT_NE(rep.status, miadmm::SolveStatus::CertificateViolation) << rep.detail;
}
