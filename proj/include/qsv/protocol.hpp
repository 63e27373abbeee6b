#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsv/noise.hpp"
#include "qsv/quantum_core.hpp"
#include "qsv/rng.hpp"
#include "qsv/simulator.hpp"
#include "qsv/strategies.hpp"

namespace qsv {

// ---------------------------------------------------------------------------
// Wire format. Every frame is exactly 6 bytes:
//
//   byte 0      frame tag
//   bytes 1-4   u32 value, little-endian: the round index, except for
//               SESSION_END where it carries the accepted-outcome count
//   byte 5      payload
//
// Payload per tag:
//   ROUND_START      bit 0: direction (0 Alice leads, 1 Bob leads)
//                    bits 1-2: setting index drawn for the round
//   MEASURE_REQUEST  bits 0-3: projector id; bits 4-7: requesting party
//                    ids 0..2 select the leader pair of setting 0..2;
//                    ids 4+2l+a select setting l's follower projector
//                    conditioned on leader outcome a
//   MEASURE_RESULT   bit 0: outcome; bits 4-7: measured party
//   FEED_FORWARD     bit 0: the leader's outcome
//   VERDICT          bit 0: 1 accept / 0 reject (the follower's outcome)
//   SESSION_END      0
//
// Round transcript grammar:
//   ROUND_START -> leader MEASURE_REQUEST -> leader MEASURE_RESULT
//     -> FEED_FORWARD -> follower MEASURE_REQUEST -> follower MEASURE_RESULT
//     -> VERDICT
// followed after the final round by one SESSION_END.
// ---------------------------------------------------------------------------

enum class FrameTag : std::uint8_t {
  kRoundStart = 0x01,
  kMeasureRequest = 0x02,
  kMeasureResult = 0x03,
  kFeedForward = 0x04,
  kVerdict = 0x05,
  kSessionEnd = 0x06,
};

enum class Party : std::uint8_t { kAlice = 0, kBob = 1, kReferee = 2 };

std::string to_string(FrameTag tag);
std::string to_string(Party party);

struct Frame {
  FrameTag tag = FrameTag::kRoundStart;
  std::uint32_t value = 0;
  std::uint8_t payload = 0;

  bool operator==(const Frame&) const = default;
};

constexpr std::size_t kFrameSize = 6;

std::array<std::uint8_t, kFrameSize> encode_frame(const Frame& frame);
/// Throws std::invalid_argument on an unknown tag byte.
Frame decode_frame(std::span<const std::uint8_t, kFrameSize> bytes);

/// Follower projector id for setting l after leader outcome a.
constexpr std::uint8_t follower_projector_id(std::size_t setting, int outcome) {
  return static_cast<std::uint8_t>(4 + 2 * setting + outcome);
}

// ---------------------------------------------------------------------------
// Channels. A duplex channel is a pair of ends; what one end sends the other
// receives, in order. The in-memory flavor hands Frame values across; the
// byte-stream flavor serializes through the wire format above, so the framed
// bytes are what crosses the boundary.
// ---------------------------------------------------------------------------

class ChannelEnd {
 public:
  virtual ~ChannelEnd() = default;
  virtual void send(const Frame& frame) = 0;
  /// Next pending frame, or nullopt when none is waiting.
  /// Throws std::runtime_error when the peer closed mid-frame or the bytes
  /// do not decode.
  virtual std::optional<Frame> try_receive() = 0;
  virtual void close() = 0;
  /// True when the peer closed and everything sent has been consumed.
  virtual bool exhausted() const = 0;
};

struct DuplexChannel {
  std::shared_ptr<ChannelEnd> first;
  std::shared_ptr<ChannelEnd> second;
};

enum class ChannelKind { kInMemory, kByteStream };

DuplexChannel make_channel(ChannelKind kind);

// ---------------------------------------------------------------------------
// Sessions.
// ---------------------------------------------------------------------------

/// Log record for one sent frame. `value` mirrors the wire's u32 field.
struct TranscriptEntry {
  std::uint32_t round = 0;
  FrameTag frame = FrameTag::kRoundStart;
  Party party = Party::kAlice;  ///< sender
  std::uint32_t payload = 0;

  nlohmann::json to_json() const;
};

struct SessionConfig {
  double theta_deg = 60.0;
  /// kUniLocc or kBiLocc; the global strategy needs an entangled
  /// measurement no pair of local parties can realize, and the LO surrogate
  /// has no setting ensemble to execute.
  StrategyKind strategy = StrategyKind::kUniLocc;
  Direction direction = Direction::kAliceToBob;  ///< Uni-LOCC only
  NoiseModel noise = NoiseModel::ideal();
  std::size_t rounds = 100;
  double delta = 0.05;
  std::uint64_t master_seed = 1;

  void validate() const;
};

/// Empirical effective operator of a session: sum of setting operators
/// weighted by observed frequencies. For the bi-directional demonstration
/// this is reported against the intended operator rather than asserted
/// equal to it.
struct RealizedOperatorReport {
  HermitianOperator estimate;
  double frobenius_distance_to_intended = 0.0;
  double implied_lambda2 = 0.0;
  /// Set when any (direction, setting) cell saw fewer than 10 rounds.
  bool low_confidence = false;
};

struct SessionResult {
  TrialRecord record;
  std::vector<TranscriptEntry> transcript;
  std::size_t rounds_completed = 0;
  std::size_t accepts = 0;
  std::optional<RealizedOperatorReport> realized;

  bool aborted = false;
  std::uint32_t abort_round = 0;
  std::string abort_reason;

  nlohmann::json summary_json() const;
};

/// Runs the feed-forward protocol: Alice coordinates (drawing the round's
/// direction and setting), the round's leader measures first, its outcome
/// crosses the Alice-Bob channel, the follower measures conditionally, and
/// the follower's outcome is the round verdict. A trusted referee holds the
/// joint state and answers measurement requests, emulating the quantum
/// correlations; the parties never see the state.
///
/// Substreams of master_seed: 0 coordinator draws, 1 unused (reserved for a
/// leading Bob drawing his own settings), 2 referee outcome draws.
SessionResult run_session(const SessionConfig& config,
                          ChannelKind channel_kind = ChannelKind::kInMemory);

/// As above over caller-supplied channels (fault injection hooks).
SessionResult run_session(const SessionConfig& config, DuplexChannel alice_bob,
                          DuplexChannel alice_referee,
                          DuplexChannel bob_referee);

/// Replays a transcript against the round grammar, the feed-forward mapping
/// (follower projector id = 4 + 2 setting + leader outcome), and the
/// accept-count bookkeeping of the record. Violations are returned, not
/// thrown; a fault-free session yields an empty list.
std::vector<std::string> validate_transcript(
    std::span<const TranscriptEntry> transcript, const TrialRecord& record);

RealizedOperatorReport realized_operator(
    std::span<const TranscriptEntry> transcript, const SessionConfig& config);

void write_transcript_jsonl(const std::filesystem::path& file,
                            std::span<const TranscriptEntry> transcript);

std::vector<TranscriptEntry> read_transcript_jsonl(
    const std::filesystem::path& file);

}  // namespace qsv
