// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace skyfuse {

/// Base class for all skyfuse errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data violates a domain invariant (zero-area box, score out of range, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input file is malformed or does not match the documented schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A filesystem operation failed (missing file, unwritable directory).
class IoError : public Error {
 public:
  using Error::Error;
};

/// A detection references a model that has no configured base weight.
class UnknownModelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Weight calibration was asked to normalize an all-zero AP vector.
class AllZeroApError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A prediction frame id has no ground-truth counterpart.
class FrameMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A PR curve was requested for a class absent from the annotations.
class NoGroundTruthError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The pixel ray is parallel to the requested target plane.
class NoIntersectionError : public Error {
 public:
  using Error::Error;
};

/// The ray-plane intersection lies at parameter t <= 0.
class BehindCameraError : public Error {
 public:
  using Error::Error;
};

/// A point falls outside the tangent-plane validity radius.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace skyfuse
