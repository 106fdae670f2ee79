#pragma once

#include <stdexcept>
#include <string>

namespace densesr {

// Base for everything the library throws. The C API maps each concrete
// type onto one dsr_status value, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// PGM parsing, one type per failure mode.
class PgmHeaderError : public IoError {
 public:
  using IoError::IoError;
};

class PgmSizeError : public IoError {
 public:
  using IoError::IoError;
};

class PgmMaxvalError : public IoError {
 public:
  using IoError::IoError;
};

// Checkpoint decoding, one type per failure mode.
class CheckpointMagicError : public Error {
 public:
  using Error::Error;
};

class CheckpointVersionError : public Error {
 public:
  using Error::Error;
};

class CheckpointTruncatedError : public Error {
 public:
  using Error::Error;
};

class CheckpointShapeError : public Error {
 public:
  using Error::Error;
};

// Model/scale disagreements at the command level.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Gradient verification failures.
class VerifyError : public Error {
 public:
  using Error::Error;
};

}  // namespace densesr
