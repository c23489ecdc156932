#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "miadmm/subsolvers.hpp"
#include "oracles.hpp"

using miadmm::CoordConstraint;
using miadmm::Matrix;
using miadmm::Vector;

namespace {

constexpr CoordConstraint kFree = CoordConstraint::Free;
constexpr CoordConstraint kNonNeg = CoordConstraint::NonNegative;
constexpr CoordConstraint kNonPos = CoordConstraint::NonPositive;
constexpr CoordConstraint kZero = CoordConstraint::FixedZero;

miadmm::QuadSubproblem make(Matrix p, Vector q, miadmm::CoordConstraints cs, Vector l1 = {}) {
    miadmm::QuadSubproblem s;
    s.x0 = Vector::Zero(q.size());
    s.P = std::move(p);
    s.q = std::move(q);
    s.constraints = std::move(cs);
    s.l1_weight = std::move(l1);
    return s;
}

}  // namespace

TEST(ScalarCoordinateMin, SoftThreshold) {
    EXPECT_DOUBLE_EQ(miadmm::scalar_coordinate_min(1, 3, 1, kFree), 2.0);
}

TEST(ScalarCoordinateMin, ClampAtBoundary) {
    EXPECT_DOUBLE_EQ(miadmm::scalar_coordinate_min(1, -2, 0, kNonNeg), 0.0);
}

TEST(ScalarCoordinateMin, NonPositiveBoundaryMatchesGrid) {
    const double t = miadmm::scalar_coordinate_min(2, 3, 1, kNonPos);
    EXPECT_DOUBLE_EQ(t, 0.0);
    double best = 0.0;
    double best_val = 1e300;
    for (int i = -10000; i <= 10000; ++i) {
        const double v = i * 1e-3;
        if (v > 0.0) continue;
        const double f = 0.5 * 2 * v * v - 3 * v + std::abs(v);
        if (f < best_val) {
            best_val = f;
            best = v;
        }
    }
    EXPECT_NEAR(t, best, 1e-12);
}

TEST(ScalarCoordinateMin, FreeWithoutPenaltyIsExactQuotient) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int i = 0; i < 100; ++i) {
        const double a = u(rng);
        const double b = u(rng) - 5.0;
        EXPECT_EQ(miadmm::scalar_coordinate_min(a, b, 0.0, kFree), b / a);
    }
}

TEST(ScalarCoordinateMin, FixedZero) {
    EXPECT_EQ(miadmm::scalar_coordinate_min(1, 5, 0, kZero), 0.0);
}

TEST(ScalarCoordinateMin, AgreesWithCandidateEnumeration) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = std::abs(u(rng)) + 0.1;
        const double b = u(rng);
        const double g = std::abs(u(rng)) * 0.5;
        for (auto c : {kFree, kNonNeg, kNonPos, kZero})
            EXPECT_NEAR(miadmm::scalar_coordinate_min(a, b, g, c), oracle::exact_scalar_min(a, b, g, c), 1e-14);
    }
}

TEST(CdSolve, SeparableClamp) {
    const auto r = miadmm::cd_solve_quadratic(make(Matrix::Identity(2, 2), Vector{{1.0, -1.0}}, {kNonNeg, kNonNeg}));
    EXPECT_NEAR(r.x[0], 1.0, 1e-12);
    EXPECT_EQ(r.x[1], 0.0);
}

TEST(CdSolve, CoupledTwoDimensionalMatchesGrid) {
    Matrix p(2, 2);
    p << 2, 1, 1, 2;
    const Vector q{{1.0, 1.0}};
    const auto s = make(p, q, {kFree, kNonPos});
    const auto r = miadmm::cd_solve_quadratic(s);
    EXPECT_NEAR(r.x[0], 0.5, 1e-9);
    EXPECT_EQ(r.x[1], 0.0);
    const auto g = oracle::grid_search(p, q, Vector(), s.constraints, 2.0, 1e-3);
    EXPECT_NEAR(r.x[0], g.x[0], 2e-3);
    EXPECT_NEAR(r.x[1], g.x[1], 2e-3);
    EXPECT_LE(miadmm::kkt_residual(s, r.x), 1e-10);
}

TEST(CdSolve, ScalarProx) {
    const auto r = miadmm::cd_solve_quadratic(make(Matrix::Identity(1, 1), Vector{{2.0}}, {kFree}, Vector{{1.0}}));
    EXPECT_NEAR(r.x[0], 1.0, 1e-15);
}

TEST(CdSolve, FixedZeroNeverMoves) {
    Matrix p(2, 2);
    p << 2, 0.5, 0.5, 1;
    const auto r = miadmm::cd_solve_quadratic(make(p, Vector{{3.0, 3.0}}, {kZero, kFree}));
    EXPECT_EQ(r.x[0], 0.0);
    EXPECT_NEAR(r.x[1], 3.0, 1e-10);
}

TEST(CdSolve, ObjectiveNeverAboveWarmStart) {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> kind(0, 3);
    for (int t = 0; t < 100; ++t) {
        const Eigen::Index d = 1 + t % 8;
        auto s = make(oracle::random_spd(d, 0.1, 5.0, rng), oracle::random_matrix(d, 1, 2.0, rng).col(0),
                      miadmm::CoordConstraints(d));
        for (auto& c : s.constraints) c = static_cast<CoordConstraint>(kind(rng));
        s.x0 = miadmm::clamp_to(s.constraints, oracle::random_matrix(d, 1, 1.0, rng).col(0));
        const auto r = miadmm::cd_solve_quadratic(s);
        EXPECT_LE(miadmm::quad_objective(s, r.x), miadmm::quad_objective(s, s.x0) + 1e-12);
        EXPECT_TRUE(miadmm::feasible(s.constraints, r.x));
        EXPECT_LE(r.kkt_residual, s.tol);
    }
}

TEST(CdSolve, RandomInstancesMatchGridOracle) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> kind(0, 3);
    std::uniform_real_distribution<double> gamma(0.0, 0.3);
    for (int t = 0; t < 30; ++t) {
        const Eigen::Index d = 1 + t % 2;  // the 3-D case runs in the acceptance suite
        auto s = make(oracle::random_spd(d, 1.0, 4.0, rng), oracle::random_matrix(d, 1, 0.5, rng).col(0),
                      miadmm::CoordConstraints(d), t % 3 == 0 ? Vector() : Vector(Vector::NullaryExpr(d, [&] {
                          return gamma(rng);
                      })));
        for (auto& c : s.constraints) c = static_cast<CoordConstraint>(kind(rng));
        const auto r = miadmm::cd_solve_quadratic(s);
        const double radius = 2.0 * s.q.norm() + 1e-3;
        const auto g = oracle::grid_search(s.P, s.q, s.l1_weight, s.constraints, radius, 1e-3);
        EXPECT_NEAR(oracle::objective(s.P, s.q, s.l1_weight, r.x), g.value, 1e-5);
        EXPECT_LE((r.x - g.x).cwiseAbs().maxCoeff(), 2e-3);
    }
}

TEST(CdSolve, UnconstrainedAgreesWithSpdSolve) {
    std::mt19937_64 rng(77);
    for (int t = 0; t < 50; ++t) {
        const Eigen::Index d = 1 + t % 12;
        const auto s = make(oracle::random_spd(d, 0.5, 5.0, rng), oracle::random_matrix(d, 1, 3.0, rng).col(0),
                            miadmm::CoordConstraints(d, kFree));
        const auto r = miadmm::cd_solve_quadratic(s);
        EXPECT_LE((r.x - miadmm::solve_spd(s.P, s.q)).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(CdSolve, InfeasibleWarmStartRejected) {
    auto s = make(Matrix::Identity(1, 1), Vector{{1.0}}, {kNonPos});
    s.x0 = Vector{{1.0}};
    EXPECT_THROW(miadmm::cd_solve_quadratic(s), miadmm::InvalidArgument);
}

TEST(CdSolve, SweepCapRaisesWithLastIterate) {
    Matrix p(2, 2);
    p << 1, 0.999999, 0.999999, 1;  // badly conditioned: slow cyclic convergence
    auto s = make(p, Vector{{1.0, -1.0}}, {kFree, kFree});
    s.max_sweeps = 3;
    try {
        miadmm::cd_solve_quadratic(s);
        FAIL() << "expected MaxSweepsExceeded";
    } catch (const miadmm::MaxSweepsExceeded& e) {
        EXPECT_EQ(e.last_iterate.size(), 2);
        EXPECT_GT(e.kkt_residual, s.tol);
    }
}

TEST(CdSolve, ZeroCurvatureCoordinate) {
    // x₂ has no curvature and no linear pull, so it stays at its warm start.
    Matrix p = Matrix::Zero(2, 2);
    p(0, 0) = 1.0;
    auto s = make(p, Vector{{2.0, 0.0}}, {kFree, kNonNeg});
    s.x0 = Vector{{0.0, 0.5}};
    const auto r = miadmm::cd_solve_quadratic(s);
    EXPECT_NEAR(r.x[0], 2.0, 1e-12);
    EXPECT_EQ(r.x[1], 0.5);
}

TEST(CdSolve, UnboundedFlatDirectionThrows) {
    Matrix p = Matrix::Zero(1, 1);
    EXPECT_THROW(miadmm::cd_solve_quadratic(make(p, Vector{{1.0}}, {kFree})), miadmm::NotPositiveDefinite);
}

TEST(KktResidual, DetectsNonOptimalPoint) {
    const auto s = make(Matrix::Identity(1, 1), Vector{{1.0}}, {kNonNeg});
    EXPECT_NEAR(miadmm::kkt_residual(s, Vector{{0.0}}), 1.0, 1e-15);
    EXPECT_NEAR(miadmm::kkt_residual(s, Vector{{1.0}}), 0.0, 1e-15);
}

TEST(FrobBall, ZeroDataProjectsOntoBall) {
    Matrix c(2, 2);
    c << 2, 1, 2, 0;  // ‖C‖_F = 3
    const auto r = miadmm::frob_ball_solve(Matrix::Zero(2, 2), Matrix::Zero(2, 2), 2.0, c);
    EXPECT_LE((r.D - c / 3.0).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT(r.mu, 0.0);
}

TEST(FrobBall, InactiveConstraintReturnsStationaryPoint) {
    Matrix g = Matrix::Identity(2, 2);
    Matrix r = 0.1 * Matrix::Identity(2, 2);
    Matrix c = Matrix::Zero(2, 2);
    const auto res = miadmm::frob_ball_solve(g, r, 1.0, c);
    // D(2G + ρI) = 2R + ρC
    EXPECT_LE((res.D * (2.0 * g + Matrix::Identity(2, 2)) - 2.0 * r).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(res.mu, 0.0);
    EXPECT_LT(res.D.norm(), 1.0);
}

TEST(FrobBall, ActiveConstraintMatchesProjectedGradient) {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 10; ++t) {
        const Matrix y = oracle::random_matrix(3, 6, 1.0, rng);
        const Matrix x = oracle::random_matrix(4, 6, 3.0, rng);
        const Matrix g = y * y.transpose();
        const Matrix r = x * y.transpose();
        const Matrix c = oracle::random_matrix(4, 3, 1.0, rng);
        const double rho = 0.5 + t * 0.2;
        const auto res = miadmm::frob_ball_solve(g, r, rho, c);
        EXPECT_NEAR(res.D.norm(), 1.0, 1e-8);
        EXPECT_GE(res.mu, 0.0);
        EXPECT_LE(std::abs(res.mu * (res.D.norm() - 1.0)), 1e-12);
        const Matrix ref = oracle::frob_ball_projected_gradient(g, r, rho, c);
        EXPECT_LE((res.D - ref).norm(), 1e-6);
        // KKT: stationarity with the ball multiplier
        const Matrix kkt = 2.0 * (res.D * g - r) + rho * (res.D - c) + 2.0 * res.mu * res.D;
        EXPECT_LE(kkt.cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(FrobBall, RejectsBadArguments) {
    EXPECT_THROW(miadmm::frob_ball_solve(Matrix::Identity(2, 2), Matrix::Zero(3, 3), 1.0, Matrix::Zero(3, 2)),
                 miadmm::InvalidArgument);
    EXPECT_THROW(miadmm::frob_ball_solve(Matrix::Identity(2, 2), Matrix::Zero(2, 2), -1.0, Matrix::Zero(2, 2)),
                 miadmm::InvalidArgument);
}
