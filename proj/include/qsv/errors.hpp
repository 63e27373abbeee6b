#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qsv {

/// Thrown when a strategy is requested outside the angular range it is
/// defined for.
class RangeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown when a recorded accept/reject sequence supports no fidelity
/// statement at the requested confidence. This is an expected outcome for
/// rejection-heavy records, not a programming error.
class NoClaimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by the feed-forward session when a frame violates the round
/// grammar or the channel dies mid-round. Carries the offending round.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::uint32_t round, const std::string& what)
      : std::runtime_error("round " + std::to_string(round) + ": " + what),
        round_(round) {}

  std::uint32_t round() const { return round_; }

 private:
  std::uint32_t round_;
};

}  // namespace qsv
