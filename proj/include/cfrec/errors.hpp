#pragma once

#include <stdexcept>
#include <string>

namespace cfrec {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Tensor shapes do not satisfy an operation's contract.
struct InvalidShapeError : Error {
    using Error::Error;
};

/// A caller-supplied argument violates a precondition.
struct InvalidArgumentError : Error {
    using Error::Error;
};

/// An entity index is out of range.
struct InvalidIndexError : Error {
    using Error::Error;
};

/// A computation produced non-finite values.
struct NumericError : Error {
    using Error::Error;
};

/// File could not be read, written, or parsed at the container level.
struct IoError : Error {
    using Error::Error;
};

/// A dataset ended up with zero usable interactions.
struct EmptyDatasetError : Error {
    using Error::Error;
};

/// Fewer entities than a grouping operation needs.
struct InsufficientEntitiesError : Error {
    using Error::Error;
};

/// A metric is undefined for the given inputs (empty restriction set,
/// entity without reviews, fewer than two pairs for a correlation).
struct UndefinedMetricError : Error {
    using Error::Error;
};

/// A statistical test cannot be run on the given sample.
struct DegenerateTestError : Error {
    using Error::Error;
};

}  // namespace cfrec
