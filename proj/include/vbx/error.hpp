#pragma once

#include <stdexcept>
#include <string>

namespace vbx {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad paths, unreadable configs, missing prerequisite artifacts.
struct ConfigError : Error {
    using Error::Error;
};

// Undecodable or unreadable input data; message names the offending path.
struct InputError : Error {
    using Error::Error;
};

// Tensor / feature-vector dimension mismatches.
struct ShapeError : Error {
    using Error::Error;
};

// Arguments outside their documented range (class indices, thresholds).
struct RangeError : Error {
    using Error::Error;
};

// Corrupt, truncated or version-mismatched model files.
struct LoadError : Error {
    using Error::Error;
};

// Input too small for the requested statistic (e.g. width-1 co-occurrence).
struct DegenerateInputError : Error {
    using Error::Error;
};

// ROC requested for a class with no positives or no negatives.
struct UndefinedAucError : Error {
    using Error::Error;
};

} // namespace vbx
