#pragma once

#include <stdexcept>
#include <string>

namespace pubrank {

/// Broad failure class, mapped one-to-one onto process exit codes by the CLI.
enum class ErrorKind {
  usage = 1,     // bad flags, bad config, violated preconditions
  data = 2,      // malformed input files, invariant violations, corruption
  upstream = 3,  // model service failures (transport, protocol, fixtures)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Persisted index or vector file failed its integrity check.
class CorruptionError : public DataError {
 public:
  explicit CorruptionError(const std::string& what) : DataError(what) {}
};

class UpstreamError : public Error {
 public:
  UpstreamError(const std::string& what, bool retryable)
      : Error(ErrorKind::upstream, what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

/// The remote side answered, but the answer violates the wire contract.
class ProtocolError : public UpstreamError {
 public:
  explicit ProtocolError(const std::string& what) : UpstreamError(what, false) {}
};

}  // namespace pubrank
