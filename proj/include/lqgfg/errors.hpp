#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lqgfg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonSymmetric : public Error {
public:
    NonSymmetric(std::size_t i, std::size_t j)
        : Error("weight matrix is not symmetric at (" + std::to_string(i) + ", " +
                std::to_string(j) + ")"),
          row(i), col(j) {}
    std::size_t row;
    std::size_t col;
};

class BoundViolation : public Error {
public:
    BoundViolation(std::size_t i, std::size_t j, double value, double bound)
        : Error("weight " + std::to_string(value) + " at (" + std::to_string(i) + ", " +
                std::to_string(j) + ") exceeds bound " + std::to_string(bound)) {}
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// A state norm exceeded the blow-up threshold (or became non-finite) at `time`.
class BlowUp : public Error {
public:
    explicit BlowUp(double t)
        : Error("integration blew up at t = " + std::to_string(t)), time(t) {}
    BlowUp(double t, const std::string& what) : Error(what), time(t) {}
    double time;
};

/// Finite escape of the eigendirection Riccati equation: the solvability
/// assumption fails for this eigenvalue on the requested horizon.
class FiniteEscape : public BlowUp {
public:
    FiniteEscape(double t, double lambda, std::size_t ell)
        : BlowUp(t, "Riccati solution for eigenvalue lambda = " + std::to_string(lambda) +
                        " (direction " + std::to_string(ell + 1) +
                        ") escapes in finite time at t = " + std::to_string(t) +
                        "; the Riccati solvability assumption fails"),
          lambda(lambda), ell(ell) {}
    double lambda;
    std::size_t ell;
};

}  // namespace lqgfg
