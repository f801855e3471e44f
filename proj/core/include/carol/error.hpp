#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace carol {

enum class ErrorKind { Config, Domain, Unsupported, Data, Training, Io, Digest };

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::Data: return "data";
    case ErrorKind::Training: return "training";
    case ErrorKind::Io: return "io";
    case ErrorKind::Digest: return "digest";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};
struct UnsupportedError : Error {
  explicit UnsupportedError(const std::string& what) : Error(ErrorKind::Unsupported, what) {}
};
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

// Raised when a learning loop produces a non-finite loss.
struct TrainingError : Error {
  TrainingError(const std::string& what, long episode)
      : Error(ErrorKind::Training, what + " (episode " + std::to_string(episode) + ")"), episode_(episode) {}
  long episode() const noexcept { return episode_; }

 private:
  long episode_;
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};
struct DigestError : Error {
  explicit DigestError(const std::string& what) : Error(ErrorKind::Digest, what) {}
};

}  // namespace carol
