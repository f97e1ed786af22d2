#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gformer {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape or extent mismatch between operands.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Invalid block/mixer configuration or missing/mis-shaped parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite values where finite input is required.
class NumericError : public Error {
public:
    using Error::Error;
};

class UnsupportedOpError : public Error {
public:
    using Error::Error;
};

// A FusedSequence index that is no longer a bijection onto its rows.
class IntegrityError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class TrainingFailure : public Error {
public:
    TrainingFailure(std::size_t step, const std::string& what)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace gformer
