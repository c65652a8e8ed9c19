#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flowspectra {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or degenerate mesh input. Carries the offending vertex (or element)
/// index when one can be named.
class GeometryError : public Error {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    explicit GeometryError(const std::string& what, std::size_t index = npos)
        : Error(index == npos ? what : what + " (index " + std::to_string(index) + ")")
        , index_(index)
    {
    }

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// A time step produced an invalid mesh (flipped or vanished element).
class StepRejected : public GeometryError {
public:
    using GeometryError::GeometryError;
};

/// Argument outside the domain of a closed-form solution.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Iterative solver hit its iteration cap.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : Error(what + " (residual " + std::to_string(residual) + " after " +
                std::to_string(iterations) + " iterations)")
        , residual_(residual)
        , iterations_(iterations)
    {
    }

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

/// Bad experiment configuration or unparsable input file.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace flowspectra
