#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace citymesh {

/// Base class for all citymesh errors. Subclasses map onto CLI exit codes:
/// validation/parse/authorization -> 1, bound violations -> 2, I/O -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant (bad config value, unsorted
/// records, weight out of range, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Byte-level decode failure. Carries the offending byte offset and, when
/// the failure is inside the record section, the record index.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset,
             std::optional<std::size_t> record_index = std::nullopt)
      : Error(what), byte_offset_(byte_offset), record_index_(record_index) {}

  [[nodiscard]] std::size_t byte_offset() const noexcept { return byte_offset_; }
  [[nodiscard]] std::optional<std::size_t> record_index() const noexcept {
    return record_index_;
  }

 private:
  std::size_t byte_offset_;
  std::optional<std::size_t> record_index_;
};

/// Structurally parsable input whose parts disagree (e.g. declared record
/// count vs. actual body length).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Caller's role does not permit the operation.
class AuthorizationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Group is full.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Peer already belongs to another group (or is not a member at all).
class MembershipError : public Error {
 public:
  using Error::Error;
};

/// Operation is disallowed by platform policy (e.g. automatic multi-group
/// creation).
class PolicyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace citymesh
