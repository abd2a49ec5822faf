#pragma once

#include <stdexcept>
#include <string>

namespace simsearch {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point does not fit the domain a measure was declared for
/// (arity, alphabet or payload kind).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A caller-supplied argument is out of its documented range.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A measure failed a metric axiom on sampled points. The message names the witness.
class NonMetricError : public Error {
public:
    using Error::Error;
};

/// A function handle is not 1-Lipschitz (or not nonexpansive) on sampled pairs.
class LipschitzError : public Error {
public:
    using Error::Error;
};

/// An approximating measure whose radius modulus fails on a sampled pair.
class ModulusError : public Error {
public:
    using Error::Error;
};

/// A ground space whose metric transform has no Euclidean embedding at the
/// requested tolerance.
class EmbeddingError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Row and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column = 0)
        : Error(what), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

}  // namespace simsearch
