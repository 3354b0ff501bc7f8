#pragma once

#include <stdexcept>
#include <string>

namespace modesynth {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyInput : Error {
    explicit EmptyInput(const std::string& what = "empty input") : Error(what) {}
};

struct InsufficientData : Error {
    explicit InsufficientData(const std::string& what = "insufficient data") : Error(what) {}
};

struct InvalidRange : Error {
    explicit InvalidRange(const std::string& what = "invalid range") : Error(what) {}
};

struct InvalidVariance : Error {
    explicit InvalidVariance(const std::string& what = "variance must be >= 0") : Error(what) {}
};

struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& what = "shape mismatch") : Error(what) {}
};

struct OutOfRange : Error {
    explicit OutOfRange(const std::string& what = "value out of range") : Error(what) {}
};

struct NegativeInput : Error {
    explicit NegativeInput(const std::string& what = "negative input") : Error(what) {}
};

struct StateNotInitialized : Error {
    explicit StateNotInitialized(const std::string& what = "state not initialized") : Error(what) {}
};

struct Intractable : Error {
    explicit Intractable(const std::string& what = "instance too large for exact computation") : Error(what) {}
};

struct EmptyBatch : Error {
    explicit EmptyBatch(const std::string& what = "empty batch") : Error(what) {}
};

struct EmptyData : Error {
    explicit EmptyData(const std::string& what = "empty data") : Error(what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what = "malformed file") : Error(what) {}
};

struct UnsupportedFormat : Error {
    explicit UnsupportedFormat(const std::string& what = "unsupported format") : Error(what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what = "i/o failure") : Error(what) {}
};

struct NoForeground : Error {
    explicit NoForeground(const std::string& what = "no foreground pixel") : Error(what) {}
};

struct InsufficientSamples : Error {
    explicit InsufficientSamples(const std::string& what = "need at least 2 samples") : Error(what) {}
};

struct NonFiniteMetric : Error {
    explicit NonFiniteMetric(const std::string& what = "metric is not finite") : Error(what) {}
};

}  // namespace modesynth
