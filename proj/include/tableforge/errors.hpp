#pragma once

#include <stdexcept>
#include <string>

namespace tableforge {

/// Base class for all domain errors raised by the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed table markup: unbalanced tags, bad attributes, token budget blown.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error("malformed-markup: " + what) {}
};

/// Element outside the supported table vocabulary (nested tables, etc).
class UnsupportedElementError : public Error {
public:
    explicit UnsupportedElementError(const std::string& what)
        : Error("unsupported-element: " + what) {}
};

/// A row/column span forces two cells onto the same grid square.
class OverlapConflictError : public Error {
public:
    explicit OverlapConflictError(const std::string& what)
        : Error("overlap-conflict: " + what) {}
};

/// Operation requires a strict (fully covered) grid.
class NonStrictTableError : public Error {
public:
    explicit NonStrictTableError(const std::string& what)
        : Error("non-strict-table: " + what) {}
};

/// Not enough known boxes to derive every border line.
class InsufficientCoverageError : public Error {
public:
    explicit InsufficientCoverageError(const std::string& what)
        : Error("insufficient-coverage: " + what) {}
};

/// Prediction carries no table cells.
class EmptyPredictionError : public Error {
public:
    explicit EmptyPredictionError(const std::string& what)
        : Error("empty-prediction: " + what) {}
};

/// Every predicted column fell below the match threshold.
class AllColumnsDiscardedError : public Error {
public:
    explicit AllColumnsDiscardedError(const std::string& what)
        : Error("all-columns-discarded: " + what) {}
};

/// Structure parameters cannot be satisfied (e.g. unreachable span coverage).
class InfeasibleParamsError : public Error {
public:
    explicit InfeasibleParamsError(const std::string& what)
        : Error("infeasible-params: " + what) {}
};

/// Input file missing or unreadable.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("unreadable-input: " + what) {}
};

/// Dataset format name not recognized.
class UnknownFormatError : public Error {
public:
    explicit UnknownFormatError(const std::string& what)
        : Error("unknown-format: " + what) {}
};

} // namespace tableforge
