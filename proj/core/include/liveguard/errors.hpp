#pragma once

#include <stdexcept>

namespace liveguard {

// Base class for every error raised by the toolkit.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear algebra / tensor shape errors.
struct DimensionMismatch : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };

// Prototype and loss errors.
struct EmptySet : Error { using Error::Error; };
struct EmptyBatch : Error { using Error::Error; };
struct UnknownCategory : Error { using Error::Error; };

// Training errors.
struct EmptyDataset : Error { using Error::Error; };
struct EmptyCategory : Error { using Error::Error; };
struct CategoryTooSmall : Error { using Error::Error; };
struct NonFiniteGradient : Error { using Error::Error; };

// Metric and threshold errors.
struct MissingClass : Error { using Error::Error; };
struct EmptyList : Error { using Error::Error; };
struct InvalidQuantile : Error { using Error::Error; };
struct DegenerateRange : Error { using Error::Error; };

// Configuration and I/O errors.
struct InvalidConfig : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct MalformedRow : Error { using Error::Error; };
struct FormatVersionMismatch : Error { using Error::Error; };
struct CorruptChecksum : Error { using Error::Error; };

}  // namespace liveguard
