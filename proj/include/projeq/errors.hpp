#pragma once

#include <stdexcept>
#include <string>

namespace projeq {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Real and complex operands mixed without an explicit promotion.
class FieldError : public Error {
public:
    using Error::Error;
};

/// Objects built over different groups were combined.
class GroupMismatch : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Requested object exceeds the desk-scale caps.
class SizeError : public Error {
public:
    using Error::Error;
};

/// A structural invariant failed during construction.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// Input data could not be read or has an invalid layout.
class DataError : public Error {
public:
    using Error::Error;
};

/// IDX file with an unexpected magic number.
class IdxMagicError : public DataError {
public:
    using DataError::DataError;
};

/// IDX file shorter than its header promises.
class IdxTruncatedError : public DataError {
public:
    using DataError::DataError;
};

/// IDX dimensions whose product overflows or exceeds the size cap.
class IdxDimensionError : public DataError {
public:
    using DataError::DataError;
};

/// Invalid run configuration, detected before any compute.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace projeq
