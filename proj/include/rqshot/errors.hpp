#pragma once

#include <stdexcept>
#include <string>

namespace rqshot {

// Base class for every error raised by the library. Subclasses carry the
// failure category so callers (notably the CLI) can map them to exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DegreeParityError : public Error { using Error::Error; };
class ContractionError : public Error { using Error::Error; };
class SizeError : public Error { using Error::Error; };
class ReconstructionError : public Error { using Error::Error; };
class LookupError : public Error { using Error::Error; };
class EncodingError : public Error { using Error::Error; };
class SelectionError : public Error { using Error::Error; };
class InvalidInstanceError : public Error { using Error::Error; };
class CheckpointError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };

} // namespace rqshot
