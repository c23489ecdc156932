#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace miadmm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Symmetric factorization failed even after jitter escalation.
class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

/// Coordinate descent hit its sweep cap before the KKT residual met tolerance.
class MaxSweepsExceeded : public Error {
public:
    MaxSweepsExceeded(Eigen::VectorXd last, double residual)
        : Error("coordinate descent did not reach KKT tolerance (residual "
                + std::to_string(residual) + ")"),
          last_iterate(std::move(last)),
          kkt_residual(residual) {}

    Eigen::VectorXd last_iterate;
    double kkt_residual;
};

class BisectionFailed : public Error {
public:
    using Error::Error;
};

/// rho must exceed 2H for the descent certificates to be meaningful.
class RhoTooSmall : public Error {
public:
    RhoTooSmall(double rho, double two_h)
        : Error("rho = " + std::to_string(rho) + " must exceed 2H = "
                + std::to_string(two_h)),
          rho(rho),
          two_h(two_h) {}

    double rho;
    double two_h;
};

class InconsistentEdge : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// A block subsolver failed; carries the index of the offending block.
class BlockSolveError : public Error {
public:
    BlockSolveError(std::size_t block, const std::string& what)
        : Error("block " + std::to_string(block) + ": " + what), block(block) {}

    std::size_t block;
};

}  // namespace miadmm
