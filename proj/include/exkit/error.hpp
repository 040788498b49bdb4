#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace exkit {

/// Base of every error raised by the library.
///
/// Errors fall into two families that the command-line tool maps to distinct
/// exit codes: input errors (malformed rings, violated preconditions) and
/// findings (a search was exhausted and certifies a negative answer).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual bool is_finding() const noexcept { return false; }
};

class Finding : public Error {
 public:
  using Error::Error;
  bool is_finding() const noexcept override { return true; }
};

class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, std::size_t size_hint)
      : Error(what), size_hint_(size_hint) {}
  /// Size of the offending ring when it could be computed, 0 otherwise.
  std::size_t size_hint() const noexcept { return size_hint_; }

 private:
  std::size_t size_hint_;
};

class MalformedRing : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class PreconditionFailed : public Error {
 public:
  using Error::Error;
};

class NotIdempotent : public PreconditionFailed {
 public:
  using PreconditionFailed::PreconditionFailed;
};

class NotStronglyIso : public PreconditionFailed {
 public:
  using PreconditionFailed::PreconditionFailed;
};

class NotUnit : public PreconditionFailed {
 public:
  using PreconditionFailed::PreconditionFailed;
};

class PairNotInRadical : public PreconditionFailed {
 public:
  PairNotInRadical(std::size_t i, std::size_t j)
      : PreconditionFailed("members " + std::to_string(i) + " and " + std::to_string(j) +
                           ": e_i*e_j is not in the radical"),
        i_(i), j_(j) {}
  std::size_t first() const noexcept { return i_; }
  std::size_t second() const noexcept { return j_; }

 private:
  std::size_t i_, j_;
};

class SummabilityViolated : public PreconditionFailed {
 public:
  explicit SummabilityViolated(std::size_t column)
      : PreconditionFailed("support certificate violated at column " + std::to_string(column)),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class NotSuitable : public Finding {
 public:
  using Finding::Finding;
};

class NotRegular : public Finding {
 public:
  using Finding::Finding;
};

class NotPiRegular : public Finding {
 public:
  using Finding::Finding;
};

class NoLift : public Finding {
 public:
  using Finding::Finding;
};

class NoIdempotentGenerator : public Finding {
 public:
  using Finding::Finding;
};

class NotSolvable : public Finding {
 public:
  NotSolvable(std::size_t stage, const std::string& why)
      : Finding("stage " + std::to_string(stage) + ": " + why), stage_(stage) {}
  std::size_t stage() const noexcept { return stage_; }

 private:
  std::size_t stage_;
};

/// Raised when a constructed object fails an identity it must satisfy by
/// construction. Never expected; indicates an implementation bug.
class InvariantViolated : public Error {
 public:
  InvariantViolated(std::size_t stage, const std::string& clause)
      : Error("stage " + std::to_string(stage) + ": invariant violated: " + clause),
        stage_(stage) {}
  std::size_t stage() const noexcept { return stage_; }

 private:
  std::size_t stage_;
};

}  // namespace exkit
