#pragma once

#include <stdexcept>
#include <string>

namespace qtime {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad call: mismatched grids, too few frames, non-finite inputs.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// A step produced non-finite values.
class NumericalBlowup : public Error {
public:
    NumericalBlowup(const std::string& what, long step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

/// Time step exceeds the stability/CFL bound; carries the admissible value.
class StepRejected : public Error {
public:
    StepRejected(const std::string& what, double admissible)
        : Error(what + " (admissible step " + std::to_string(admissible) + ")"),
          admissible_(admissible) {}
    double admissible() const { return admissible_; }

private:
    double admissible_;
};

/// State violates an invariant (e.g. superluminal node, S <= 0).
class StateInvalid : public Error {
public:
    using Error::Error;
};

/// Iterative solver did not converge; carries the last residual.
class IterationLimit : public Error {
public:
    IterationLimit(const std::string& what, double residual)
        : Error(what + " (last residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Vanishing discrete tangent or failed curve solve.
class DegenerateCurve : public Error {
public:
    DegenerateCurve(const std::string& what, int node)
        : Error(what + " (node " + std::to_string(node) + ")"), node_(node) {}
    int node() const { return node_; }

private:
    int node_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// Trial field violates |b*| = 1 or ||A|| <= lambda.
class InvalidTrial : public Error {
public:
    using Error::Error;
};

/// Certification parameters outside the admissible range.
class InvalidParams : public Error {
public:
    using Error::Error;
};

/// Kernel width below the grid resolvability limit.
class ResolvabilityError : public Error {
public:
    using Error::Error;
};

}  // namespace qtime
