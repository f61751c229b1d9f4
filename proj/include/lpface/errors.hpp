#pragma once

#include <stdexcept>
#include <string>

namespace lpface {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or truncated image stream (PGM decoding).
class DecodeError : public Error {
public:
    using Error::Error;
};

/// Arguments violate an operation's preconditions (shape mismatch, bad range).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Input too small or otherwise unusable for a geometric transform.
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// Training set carries no variance (all images identical).
class DegenerateTrainingSet : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite error or gradient.
class TrainingDiverged : public Error {
public:
    TrainingDiverged(const std::string& what, int epoch)
        : Error(what), epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

/// Dataset directory missing, incomplete, or inconsistent.
class IngestionError : public Error {
public:
    using Error::Error;
};

/// Requested train/test split is infeasible for the dataset.
class InvalidSplit : public Error {
public:
    using Error::Error;
};

/// Model bundle could not be written or read back.
class PersistenceError : public Error {
public:
    using Error::Error;
};

}  // namespace lpface
