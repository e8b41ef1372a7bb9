#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chainprofiler {

/// Base of every error raised by the library. Callers that only need a
/// diagnostic can catch this and print what().
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ingest
class MalformedRow : public Error {
 public:
  MalformedRow(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class DuplicateTxHash : public Error {
 public:
  explicit DuplicateTxHash(const std::string& hash) : Error("duplicate transaction " + hash), hash_(hash) {}
  const std::string& hash() const noexcept { return hash_; }

 private:
  std::string hash_;
};

class EmptyFile : public Error {
 public:
  explicit EmptyFile(const std::string& path) : Error("empty file: " + path) {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

// api client
class RateLimited : public Error {
 public:
  using Error::Error;
};

class HttpError : public Error {
 public:
  explicit HttpError(int status) : Error("http status " + std::to_string(status)), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class ApiError : public Error {
 public:
  using Error::Error;
};

// profiles / eval / embeddings
class EmptyInput : public Error {
 public:
  using Error::Error;
};

class MissingDay : public Error {
 public:
  explicit MissingDay(const std::string& date) : Error("no daily average gas price for " + date), date_(date) {}
  const std::string& date() const noexcept { return date_; }

 private:
  std::string date_;
};

class EmptyGraph : public Error {
 public:
  using Error::Error;
};

class EmptySequences : public Error {
 public:
  using Error::Error;
};

class MismatchedCandidates : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class MissingFeatures : public Error {
 public:
  explicit MissingFeatures(const std::string& address)
      : Error("no features for " + address), address_(address) {}
  const std::string& address() const noexcept { return address_; }

 private:
  std::string address_;
};

class EmptyResults : public Error {
 public:
  using Error::Error;
};

// fingerprint
class DegenerateSample : public Error {
 public:
  using Error::Error;
};

class NonConvergent : public Error {
 public:
  using Error::Error;
};

class EmptyLedger : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace chainprofiler
