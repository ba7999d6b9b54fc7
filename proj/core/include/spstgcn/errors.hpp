#pragma once

#include <stdexcept>
#include <string>

namespace spstgcn {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input file violates the declared layout (counts disagree with content,
// unparseable tokens, truncated stream).
class MalformedFile : public Error {
public:
    using Error::Error;
};

// A parsed coordinate is NaN or infinite.
class NonFiniteCoordinate : public Error {
public:
    using Error::Error;
};

// Sequence has no frame containing any body.
class EmptySequence : public Error {
public:
    using Error::Error;
};

// Synthetic dataset specification is unusable (fewer than 2 classes, ...).
class InvalidSpec : public Error {
public:
    using Error::Error;
};

// Temporal operation requires more frames than the input provides.
class SequenceTooShort : public Error {
public:
    using Error::Error;
};

// Two series disagree on their point dimensionality.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Tensor shapes are inconsistent with the operation contract.
class ShapeMismatch : public Error {
public:
    using Error::Error;
};

// Class label outside [0, num_classes).
class LabelOutOfRange : public Error {
public:
    using Error::Error;
};

// Configuration file or key set is invalid; message names the offending key.
class InvalidConfig : public Error {
public:
    using Error::Error;
};

// Filesystem / serialization failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace spstgcn
