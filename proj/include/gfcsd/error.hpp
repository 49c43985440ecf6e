#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gfcsd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes or lengths of the arguments disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An argument violates its documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An iterative kernel failed to converge within its sweep budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A cluster lost all of its membership mass during fitting.
class DegenerateClusterError : public Error {
public:
    DegenerateClusterError(std::size_t iteration, std::size_t cluster)
        : Error("degenerate cluster " + std::to_string(cluster) +
                " at iteration " + std::to_string(iteration)),
          iteration_(iteration),
          cluster_(cluster) {}

    std::size_t iteration() const noexcept { return iteration_; }
    std::size_t cluster() const noexcept { return cluster_; }

private:
    std::size_t iteration_;
    std::size_t cluster_;
};

/// I/O or parse failure; the message carries the path and location.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace gfcsd
