// Copyright 2026 The grasp-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace grasp {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix/tensor dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a domain invariant (non-finite feature, empty id, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an API precondition (querying a non-edge, mismatched trace).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or command-line settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value produced inside the network.
class NumericError : public Error {
 public:
  NumericError(int layer, const std::string& what)
      : Error("layer " + std::to_string(layer) + ": " + what), layer_(layer) {}
  int layer() const noexcept { return layer_; }

 private:
  int layer_;
};

/// Training diverged (loss became NaN/Inf).
class TrainingError : public Error {
 public:
  TrainingError(int epoch, const std::string& what)
      : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// Metric undefined for the given confusion matrix.
class MetricError : public Error {
 public:
  MetricError(int cls, const std::string& what)
      : Error("class " + std::to_string(cls) + ": " + what), class_(cls) {}
  int class_index() const noexcept { return class_; }

 private:
  int class_;
};

// Binary file format failures. Each has its own type so callers can tell a
// foreign file from a damaged one.
class FormatError : public Error {
 public:
  using Error::Error;
};

class BadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

class BadVersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace grasp
