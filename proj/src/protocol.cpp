#include "qsv/protocol.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <stdexcept>

#include "qsv/errors.hpp"

namespace qsv {

namespace {

constexpr std::uint8_t party_nibble(Party p) {
  return static_cast<std::uint8_t>(static_cast<std::uint8_t>(p) << 4);
}

constexpr Party payload_party(std::uint8_t payload) {
  return static_cast<Party>(payload >> 4);
}

double snap_probability(double p) {
  if (p > 1.0 - 1e-12) return 1.0;
  if (p < 1e-12) return 0.0;
  return p;
}

Mat4 on_side(const SingleQubitState& state, Party side) {
  return side == Party::kAlice
             ? tensor(state.projector(), Mat2::Identity())
             : tensor(Mat2::Identity(), state.projector());
}

}  // namespace

std::string to_string(FrameTag tag) {
  switch (tag) {
    case FrameTag::kRoundStart: return "round_start";
    case FrameTag::kMeasureRequest: return "measure_request";
    case FrameTag::kMeasureResult: return "measure_result";
    case FrameTag::kFeedForward: return "feed_forward";
    case FrameTag::kVerdict: return "verdict";
    case FrameTag::kSessionEnd: return "session_end";
  }
  return "?";
}

std::string to_string(Party party) {
  switch (party) {
    case Party::kAlice: return "alice";
    case Party::kBob: return "bob";
    case Party::kReferee: return "referee";
  }
  return "?";
}

std::array<std::uint8_t, kFrameSize> encode_frame(const Frame& frame) {
  return {static_cast<std::uint8_t>(frame.tag),
          static_cast<std::uint8_t>(frame.value & 0xff),
          static_cast<std::uint8_t>((frame.value >> 8) & 0xff),
          static_cast<std::uint8_t>((frame.value >> 16) & 0xff),
          static_cast<std::uint8_t>((frame.value >> 24) & 0xff),
          frame.payload};
}

Frame decode_frame(std::span<const std::uint8_t, kFrameSize> bytes) {
  const std::uint8_t tag = bytes[0];
  if (tag < static_cast<std::uint8_t>(FrameTag::kRoundStart) ||
      tag > static_cast<std::uint8_t>(FrameTag::kSessionEnd)) {
    throw std::invalid_argument("decode_frame: unknown frame tag " +
                                std::to_string(tag));
  }
  Frame frame;
  frame.tag = static_cast<FrameTag>(tag);
  frame.value = static_cast<std::uint32_t>(bytes[1]) |
                (static_cast<std::uint32_t>(bytes[2]) << 8) |
                (static_cast<std::uint32_t>(bytes[3]) << 16) |
                (static_cast<std::uint32_t>(bytes[4]) << 24);
  frame.payload = bytes[5];
  return frame;
}

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

namespace {

struct FrameQueues {
  std::deque<Frame> to_second;
  std::deque<Frame> to_first;
  bool first_closed = false;
  bool second_closed = false;
};

class InMemoryEnd : public ChannelEnd {
 public:
  InMemoryEnd(std::shared_ptr<FrameQueues> shared, bool is_first)
      : shared_(std::move(shared)), is_first_(is_first) {}

  void send(const Frame& frame) override {
    (is_first_ ? shared_->to_second : shared_->to_first).push_back(frame);
  }

  std::optional<Frame> try_receive() override {
    auto& queue = is_first_ ? shared_->to_first : shared_->to_second;
    if (queue.empty()) return std::nullopt;
    Frame frame = queue.front();
    queue.pop_front();
    return frame;
  }

  void close() override {
    (is_first_ ? shared_->first_closed : shared_->second_closed) = true;
  }

  bool exhausted() const override {
    const auto& queue = is_first_ ? shared_->to_first : shared_->to_second;
    const bool peer_closed =
        is_first_ ? shared_->second_closed : shared_->first_closed;
    return peer_closed && queue.empty();
  }

 private:
  std::shared_ptr<FrameQueues> shared_;
  bool is_first_;
};

struct ByteBuffers {
  std::vector<std::uint8_t> to_second;
  std::vector<std::uint8_t> to_first;
  std::size_t read_to_second = 0;
  std::size_t read_to_first = 0;
  bool first_closed = false;
  bool second_closed = false;
};

class ByteStreamEnd : public ChannelEnd {
 public:
  ByteStreamEnd(std::shared_ptr<ByteBuffers> shared, bool is_first)
      : shared_(std::move(shared)), is_first_(is_first) {}

  void send(const Frame& frame) override {
    const auto bytes = encode_frame(frame);
    auto& buffer = is_first_ ? shared_->to_second : shared_->to_first;
    buffer.insert(buffer.end(), bytes.begin(), bytes.end());
  }

  std::optional<Frame> try_receive() override {
    auto& buffer = is_first_ ? shared_->to_first : shared_->to_second;
    auto& offset = is_first_ ? shared_->read_to_first : shared_->read_to_second;
    const std::size_t available = buffer.size() - offset;
    if (available == 0) return std::nullopt;
    if (available < kFrameSize) {
      const bool peer_closed =
          is_first_ ? shared_->second_closed : shared_->first_closed;
      if (peer_closed) {
        throw std::runtime_error("byte channel: truncated frame at close");
      }
      return std::nullopt;
    }
    std::array<std::uint8_t, kFrameSize> bytes;
    std::copy_n(buffer.begin() + static_cast<std::ptrdiff_t>(offset),
                kFrameSize, bytes.begin());
    offset += kFrameSize;
    return decode_frame(bytes);
  }

  void close() override {
    (is_first_ ? shared_->first_closed : shared_->second_closed) = true;
  }

  bool exhausted() const override {
    const auto& buffer = is_first_ ? shared_->to_first : shared_->to_second;
    const auto offset =
        is_first_ ? shared_->read_to_first : shared_->read_to_second;
    const bool peer_closed =
        is_first_ ? shared_->second_closed : shared_->first_closed;
    return peer_closed && offset >= buffer.size();
  }

 private:
  std::shared_ptr<ByteBuffers> shared_;
  bool is_first_;
};

}  // namespace

DuplexChannel make_channel(ChannelKind kind) {
  if (kind == ChannelKind::kInMemory) {
    auto shared = std::make_shared<FrameQueues>();
    return {std::make_shared<InMemoryEnd>(shared, true),
            std::make_shared<InMemoryEnd>(shared, false)};
  }
  auto shared = std::make_shared<ByteBuffers>();
  return {std::make_shared<ByteStreamEnd>(shared, true),
          std::make_shared<ByteStreamEnd>(shared, false)};
}

// ---------------------------------------------------------------------------
// Session actors. Each actor owns its channel ends and a single-threaded
// state machine; the harness pumps them until Alice and Bob both finish.
// ---------------------------------------------------------------------------

nlohmann::json TranscriptEntry::to_json() const {
  return {{"round", round},
          {"frame", to_string(frame)},
          {"party", to_string(party)},
          {"payload", payload}};
}

void SessionConfig::validate() const {
  if (strategy != StrategyKind::kUniLocc &&
      strategy != StrategyKind::kBiLocc) {
    throw std::invalid_argument(
        "run_session: only the Uni-LOCC strategy and the Bi-LOCC "
        "demonstration mode are executable as a feed-forward protocol");
  }
  if (rounds < 1) throw std::domain_error("run_session: rounds must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::domain_error("run_session: delta must lie in (0, 1)");
  }
}

namespace {

class Logger {
 public:
  explicit Logger(std::vector<TranscriptEntry>* transcript)
      : transcript_(transcript) {}

  void log(std::uint32_t round, FrameTag tag, Party sender,
           std::uint32_t payload) {
    transcript_->push_back({round, tag, sender, payload});
  }

 private:
  std::vector<TranscriptEntry>* transcript_;
};

class AliceActor {
 public:
  AliceActor(const SessionConfig& config, const Strategy& sampler,
             std::shared_ptr<ChannelEnd> to_bob,
             std::shared_ptr<ChannelEnd> to_referee, Logger* log)
      : config_(config),
        sampler_(sampler),
        to_bob_(std::move(to_bob)),
        to_referee_(std::move(to_referee)),
        log_(log),
        rng_(derive_seed(config.master_seed, 0)) {
    record_.seed = config.master_seed;
  }

  bool done() const { return done_; }
  std::uint32_t current_round() const { return round_; }
  const TrialRecord& record() const { return record_; }

  bool step() {
    bool progress = false;
    if (state_ == State::kStartRound && !done_) {
      start_round();
      progress = true;
    }
    while (auto frame = to_referee_->try_receive()) {
      handle_referee(*frame);
      progress = true;
    }
    while (auto frame = to_bob_->try_receive()) {
      handle_bob(*frame);
      progress = true;
    }
    return progress;
  }

 private:
  enum class State {
    kStartRound,
    kAwaitOwnResult,    // leading: waiting for the referee
    kAwaitVerdict,      // leading: waiting for Bob's verdict
    kAwaitFeedForward,  // following: waiting for Bob's outcome
    kAwaitFollowResult  // following: waiting for the referee
  };

  void start_round() {
    if (round_ >= config_.rounds) {
      // SESSION_END carries the accept count in the u32 field.
      to_bob_->send({FrameTag::kSessionEnd,
                     static_cast<std::uint32_t>(record_.accept_count()), 0});
      log_->log(round_, FrameTag::kSessionEnd, Party::kAlice,
                static_cast<std::uint32_t>(record_.accept_count()));
      done_ = true;
      return;
    }
    // Coordinator draws, in order: direction (Bi only), then setting.
    if (config_.strategy == StrategyKind::kBiLocc) {
      leads_ = rng_.uniform() < 0.5;
    } else {
      leads_ = config_.direction == Direction::kAliceToBob;
    }
    setting_ = sampler_.sample_setting(rng_);
    const std::uint8_t payload = static_cast<std::uint8_t>(
        (setting_ << 1) | (leads_ ? 0u : 1u));
    to_bob_->send({FrameTag::kRoundStart, round_, payload});
    log_->log(round_, FrameTag::kRoundStart, Party::kAlice, payload);
    if (leads_) {
      send_measure_request(static_cast<std::uint8_t>(setting_));
      state_ = State::kAwaitOwnResult;
    } else {
      state_ = State::kAwaitFeedForward;
    }
  }

  void send_measure_request(std::uint8_t projector_id) {
    const std::uint8_t payload = party_nibble(Party::kAlice) | projector_id;
    to_referee_->send({FrameTag::kMeasureRequest, round_, payload});
    log_->log(round_, FrameTag::kMeasureRequest, Party::kAlice, payload);
  }

  void handle_referee(const Frame& frame) {
    if (frame.tag != FrameTag::kMeasureResult || frame.value != round_) {
      throw ProtocolError(round_, "alice: unexpected frame from referee");
    }
    const int outcome = frame.payload & 1;
    if (state_ == State::kAwaitOwnResult) {
      to_bob_->send({FrameTag::kFeedForward, round_,
                     static_cast<std::uint8_t>(outcome)});
      log_->log(round_, FrameTag::kFeedForward, Party::kAlice,
                static_cast<std::uint32_t>(outcome));
      state_ = State::kAwaitVerdict;
    } else if (state_ == State::kAwaitFollowResult) {
      to_bob_->send({FrameTag::kVerdict, round_,
                     static_cast<std::uint8_t>(outcome)});
      log_->log(round_, FrameTag::kVerdict, Party::kAlice,
                static_cast<std::uint32_t>(outcome));
      finish_round(outcome == 1);
    } else {
      throw ProtocolError(round_, "alice: measure result out of turn");
    }
  }

  void handle_bob(const Frame& frame) {
    if (frame.value != round_) {
      throw ProtocolError(round_, "alice: frame for a different round");
    }
    if (frame.tag == FrameTag::kFeedForward &&
        state_ == State::kAwaitFeedForward) {
      const int leader_outcome = frame.payload & 1;
      send_measure_request(follower_projector_id(setting_, leader_outcome));
      state_ = State::kAwaitFollowResult;
    } else if (frame.tag == FrameTag::kVerdict &&
               state_ == State::kAwaitVerdict) {
      finish_round((frame.payload & 1) == 1);
    } else {
      throw ProtocolError(round_, "alice: frame violates the round grammar");
    }
  }

  void finish_round(bool accept) {
    record_.bits.push_back(accept ? 1 : 0);
    record_.setting_trace.push_back(static_cast<int>(setting_));
    ++round_;
    state_ = State::kStartRound;
  }

  const SessionConfig& config_;
  const Strategy& sampler_;
  std::shared_ptr<ChannelEnd> to_bob_;
  std::shared_ptr<ChannelEnd> to_referee_;
  Logger* log_;
  SplitMix64 rng_;

  State state_ = State::kStartRound;
  std::uint32_t round_ = 0;
  bool leads_ = true;
  std::size_t setting_ = 0;
  bool done_ = false;
  TrialRecord record_;
};

class BobActor {
 public:
  BobActor(std::shared_ptr<ChannelEnd> to_alice,
           std::shared_ptr<ChannelEnd> to_referee, Logger* log)
      : to_alice_(std::move(to_alice)),
        to_referee_(std::move(to_referee)),
        log_(log) {}

  bool done() const { return done_; }

  bool step() {
    bool progress = false;
    while (auto frame = to_alice_->try_receive()) {
      handle_alice(*frame);
      progress = true;
    }
    while (auto frame = to_referee_->try_receive()) {
      handle_referee(*frame);
      progress = true;
    }
    return progress;
  }

 private:
  enum class State {
    kIdle,
    kAwaitOwnResult,    // leading
    kAwaitVerdict,      // leading: Alice reports the round verdict
    kAwaitFeedForward,  // following
    kAwaitFollowResult  // following
  };

  void send_measure_request(std::uint8_t projector_id) {
    const std::uint8_t payload = party_nibble(Party::kBob) | projector_id;
    to_referee_->send({FrameTag::kMeasureRequest, round_, payload});
    log_->log(round_, FrameTag::kMeasureRequest, Party::kBob, payload);
  }

  void handle_alice(const Frame& frame) {
    switch (frame.tag) {
      case FrameTag::kRoundStart: {
        if (state_ != State::kIdle) {
          throw ProtocolError(frame.value, "bob: round started out of turn");
        }
        round_ = frame.value;
        setting_ = (frame.payload >> 1) & 0x3;
        const bool bob_leads = (frame.payload & 1) != 0;
        if (bob_leads) {
          send_measure_request(static_cast<std::uint8_t>(setting_));
          state_ = State::kAwaitOwnResult;
        } else {
          state_ = State::kAwaitFeedForward;
        }
        return;
      }
      case FrameTag::kFeedForward: {
        if (state_ != State::kAwaitFeedForward || frame.value != round_) {
          throw ProtocolError(round_, "bob: feed-forward out of turn");
        }
        const int leader_outcome = frame.payload & 1;
        send_measure_request(follower_projector_id(setting_, leader_outcome));
        state_ = State::kAwaitFollowResult;
        return;
      }
      case FrameTag::kVerdict: {
        if (state_ != State::kAwaitVerdict || frame.value != round_) {
          throw ProtocolError(round_, "bob: verdict out of turn");
        }
        ++rounds_;
        accepts_ += frame.payload & 1;
        state_ = State::kIdle;
        return;
      }
      case FrameTag::kSessionEnd: {
        if (state_ != State::kIdle) {
          throw ProtocolError(round_, "bob: session ended mid-round");
        }
        if (frame.value != accepts_) {
          throw ProtocolError(round_,
                              "bob: session accept count disagrees with "
                              "observed verdicts");
        }
        done_ = true;
        return;
      }
      default:
        throw ProtocolError(round_, "bob: frame violates the round grammar");
    }
  }

  void handle_referee(const Frame& frame) {
    if (frame.tag != FrameTag::kMeasureResult || frame.value != round_) {
      throw ProtocolError(round_, "bob: unexpected frame from referee");
    }
    const int outcome = frame.payload & 1;
    if (state_ == State::kAwaitOwnResult) {
      to_alice_->send({FrameTag::kFeedForward, round_,
                       static_cast<std::uint8_t>(outcome)});
      log_->log(round_, FrameTag::kFeedForward, Party::kBob,
                static_cast<std::uint32_t>(outcome));
      state_ = State::kAwaitVerdict;
    } else if (state_ == State::kAwaitFollowResult) {
      to_alice_->send({FrameTag::kVerdict, round_,
                       static_cast<std::uint8_t>(outcome)});
      log_->log(round_, FrameTag::kVerdict, Party::kBob,
                static_cast<std::uint32_t>(outcome));
      ++rounds_;
      accepts_ += outcome;
      state_ = State::kIdle;
    } else {
      throw ProtocolError(round_, "bob: measure result out of turn");
    }
  }

  std::shared_ptr<ChannelEnd> to_alice_;
  std::shared_ptr<ChannelEnd> to_referee_;
  Logger* log_;

  State state_ = State::kIdle;
  std::uint32_t round_ = 0;
  std::size_t setting_ = 0;
  std::size_t rounds_ = 0;
  std::uint32_t accepts_ = 0;
  bool done_ = false;
};

/// Holds the joint state and answers measurement requests with correctly
/// correlated outcomes. The first request of a round measures a fresh copy
/// of the source state; the second measures the renormalized conditioned
/// state, which is how the follower's statistics acquire the quantum
/// correlations.
class RefereeActor {
 public:
  RefereeActor(const SessionConfig& config, const Strategy& uni_ab,
               const Strategy& uni_ba, const DensityMatrix& source,
               std::shared_ptr<ChannelEnd> to_alice,
               std::shared_ptr<ChannelEnd> to_bob, Logger* log)
      : uni_ab_(uni_ab),
        uni_ba_(uni_ba),
        source_(source),
        to_alice_(std::move(to_alice)),
        to_bob_(std::move(to_bob)),
        log_(log),
        rng_(derive_seed(config.master_seed, 2)) {}

  bool step() {
    bool progress = false;
    while (auto frame = to_alice_->try_receive()) {
      handle(*frame, Party::kAlice);
      progress = true;
    }
    while (auto frame = to_bob_->try_receive()) {
      handle(*frame, Party::kBob);
      progress = true;
    }
    return progress;
  }

 private:
  const Strategy& settings_for_leader(Party leader) const {
    return leader == Party::kAlice ? uni_ab_ : uni_ba_;
  }

  void handle(const Frame& frame, Party requester) {
    if (frame.tag != FrameTag::kMeasureRequest) {
      throw ProtocolError(frame.value, "referee: expected a measure request");
    }
    if (payload_party(frame.payload) != requester) {
      throw ProtocolError(frame.value,
                          "referee: request party does not match its channel");
    }
    if (frame.value != round_) {
      if (frame.value != round_ + 1 && !(round_ == 0 && !round_open_)) {
        throw ProtocolError(frame.value, "referee: request for a stale round");
      }
      round_ = frame.value;
      round_open_ = false;
    }
    const std::uint8_t projector_id = frame.payload & 0x0f;
    int outcome = 0;
    if (!round_open_) {
      outcome = measure_leader(requester, projector_id);
    } else {
      outcome = measure_follower(requester, projector_id);
    }
    const std::uint8_t payload =
        party_nibble(requester) | static_cast<std::uint8_t>(outcome);
    auto& reply = requester == Party::kAlice ? to_alice_ : to_bob_;
    reply->send({FrameTag::kMeasureResult, round_, payload});
    log_->log(round_, FrameTag::kMeasureResult, Party::kReferee, payload);
  }

  int measure_leader(Party leader, std::uint8_t projector_id) {
    if (projector_id > 2) {
      throw ProtocolError(round_, "referee: leader projector id out of range");
    }
    const MeasurementSetting& setting =
        settings_for_leader(leader).settings()[projector_id];
    const Mat4 proj1 = on_side(setting.leader_outcome1, leader);
    const Mat4 proj0 = on_side(setting.leader_outcome0, leader);
    const double p1 =
        snap_probability((proj1 * source_.entries()).trace().real());
    int outcome = rng_.bernoulli(p1) ? 1 : 0;
    if (outcome == 1 && p1 < 1e-14) outcome = 0;
    if (outcome == 0 && 1.0 - p1 < 1e-14) outcome = 1;
    const Mat4& proj = outcome ? proj1 : proj0;
    const double p_branch = outcome ? p1 : 1.0 - p1;
    conditioned_ = proj * source_.entries() * proj / p_branch;
    leader_ = leader;
    round_open_ = true;
    return outcome;
  }

  int measure_follower(Party follower, std::uint8_t projector_id) {
    if (follower == leader_) {
      throw ProtocolError(round_, "referee: leader measured twice");
    }
    if (projector_id < 4 || projector_id > 9) {
      throw ProtocolError(round_,
                          "referee: follower projector id out of range");
    }
    const std::size_t setting_index = (projector_id - 4) / 2;
    const int leader_outcome = (projector_id - 4) % 2;
    const MeasurementSetting& setting =
        settings_for_leader(leader_).settings()[setting_index];
    const SingleQubitState& conditional = leader_outcome
                                              ? setting.follower_given1
                                              : setting.follower_given0;
    const double q = snap_probability(
        (on_side(conditional, follower) * conditioned_).trace().real());
    round_open_ = false;
    return rng_.bernoulli(q) ? 1 : 0;
  }

  const Strategy& uni_ab_;
  const Strategy& uni_ba_;
  DensityMatrix source_;
  std::shared_ptr<ChannelEnd> to_alice_;
  std::shared_ptr<ChannelEnd> to_bob_;
  Logger* log_;
  SplitMix64 rng_;

  std::uint32_t round_ = 0;
  bool round_open_ = false;  ///< leader measured, follower still pending
  Party leader_ = Party::kAlice;
  Mat4 conditioned_ = Mat4::Zero();
};

}  // namespace

SessionResult run_session(const SessionConfig& config,
                          ChannelKind channel_kind) {
  return run_session(config, make_channel(channel_kind),
                     make_channel(channel_kind), make_channel(channel_kind));
}

SessionResult run_session(const SessionConfig& config, DuplexChannel alice_bob,
                          DuplexChannel alice_referee,
                          DuplexChannel bob_referee) {
  config.validate();
  const Strategy uni_ab = build_uni_locc(config.theta_deg,
                                         Direction::kAliceToBob);
  const Strategy uni_ba = build_uni_locc(config.theta_deg,
                                         Direction::kBobToAlice);
  const DensityMatrix source = apply_noise(config.theta_deg, config.noise);

  SessionResult result;
  Logger logger(&result.transcript);
  AliceActor alice(config, uni_ab, alice_bob.first, alice_referee.first,
                   &logger);
  BobActor bob(alice_bob.second, bob_referee.first, &logger);
  RefereeActor referee(config, uni_ab, uni_ba, source, alice_referee.second,
                       bob_referee.second, &logger);

  try {
    while (!(alice.done() && bob.done())) {
      bool progress = alice.step();
      progress |= bob.step();
      progress |= referee.step();
      if (!progress) {
        throw ProtocolError(alice.current_round(),
                            "session stalled: channel closed or frame lost "
                            "mid-round");
      }
    }
  } catch (const ProtocolError& error) {
    result.aborted = true;
    result.abort_round = error.round();
    result.abort_reason = error.what();
  } catch (const std::exception& error) {
    result.aborted = true;
    result.abort_round = alice.current_round();
    result.abort_reason = error.what();
  }

  result.record = alice.record();
  result.rounds_completed = result.record.bits.size();
  result.accepts = result.record.accept_count();
  if (!result.aborted && result.rounds_completed > 0) {
    result.realized = realized_operator(result.transcript, config);
  }
  return result;
}

nlohmann::json SessionResult::summary_json() const {
  nlohmann::json j;
  j["rounds"] = rounds_completed;
  j["accepts"] = accepts;
  j["realized_lambda2"] =
      realized ? nlohmann::json(realized->implied_lambda2) : nullptr;
  j["aborted"] = aborted;
  if (aborted) {
    j["abort_round"] = abort_round;
    j["abort_reason"] = abort_reason;
  }
  return j;
}

std::vector<std::string> validate_transcript(
    std::span<const TranscriptEntry> transcript, const TrialRecord& record) {
  std::vector<std::string> violations;
  auto complain = [&](std::uint32_t round, const std::string& what) {
    violations.push_back("round " + std::to_string(round) + ": " + what);
  };

  std::size_t i = 0;
  std::uint32_t round = 0;
  std::vector<int> verdicts;
  while (i < transcript.size() &&
         transcript[i].frame != FrameTag::kSessionEnd) {
    if (transcript.size() - i < 7) {
      complain(round, "incomplete round: transcript truncated");
      return violations;
    }
    const auto* e = transcript.data() + i;
    for (int k = 0; k < 7; ++k) {
      if (e[k].frame == FrameTag::kSessionEnd) {
        complain(round, "incomplete round: transcript truncated");
        return violations;
      }
      if (e[k].round != round) {
        complain(round, "frame carries the wrong round index");
      }
    }

    if (e[0].frame != FrameTag::kRoundStart || e[0].party != Party::kAlice) {
      complain(round, "expected a round start from alice");
    }
    const bool bob_leads = (e[0].payload & 1) != 0;
    const std::size_t setting = (e[0].payload >> 1) & 0x3;
    const Party leader = bob_leads ? Party::kBob : Party::kAlice;
    const Party follower = bob_leads ? Party::kAlice : Party::kBob;
    if (setting > 2) complain(round, "setting index out of range");

    if (e[1].frame != FrameTag::kMeasureRequest || e[1].party != leader ||
        payload_party(static_cast<std::uint8_t>(e[1].payload)) != leader) {
      complain(round, "expected the leader's measure request");
    } else if ((e[1].payload & 0x0f) != setting) {
      complain(round, "leader measured a setting other than the drawn one");
    }

    if (e[2].frame != FrameTag::kMeasureResult ||
        e[2].party != Party::kReferee ||
        payload_party(static_cast<std::uint8_t>(e[2].payload)) != leader) {
      complain(round, "expected the leader's measure result");
    }
    const int leader_outcome = static_cast<int>(e[2].payload & 1);

    if (e[3].frame != FrameTag::kFeedForward || e[3].party != leader) {
      complain(round, "expected a feed-forward from the leader");
    } else if (static_cast<int>(e[3].payload & 1) != leader_outcome) {
      complain(round, "feed-forward bit differs from the leader's outcome");
    }

    if (e[4].frame != FrameTag::kMeasureRequest || e[4].party != follower ||
        payload_party(static_cast<std::uint8_t>(e[4].payload)) != follower) {
      complain(round, "expected the follower's measure request");
    } else {
      const std::uint8_t expected =
          follower_projector_id(setting, leader_outcome);
      if ((e[4].payload & 0x0f) != expected) {
        complain(round,
                 "follower projector does not follow the feed-forward rule "
                 "(expected id " + std::to_string(expected) + " = 4 + 2*" +
                 std::to_string(setting) + " + " +
                 std::to_string(leader_outcome) + ", saw id " +
                 std::to_string(e[4].payload & 0x0f) + ")");
      }
    }

    if (e[5].frame != FrameTag::kMeasureResult ||
        e[5].party != Party::kReferee ||
        payload_party(static_cast<std::uint8_t>(e[5].payload)) != follower) {
      complain(round, "expected the follower's measure result");
    }
    const int follower_outcome = static_cast<int>(e[5].payload & 1);

    if (e[6].frame != FrameTag::kVerdict || e[6].party != follower) {
      complain(round, "expected the follower's verdict");
    } else if (static_cast<int>(e[6].payload & 1) != follower_outcome) {
      complain(round, "verdict differs from the follower's outcome");
    }
    verdicts.push_back(follower_outcome);
    ++round;
    i += 7;
  }

  if (i >= transcript.size()) {
    complain(round, "missing session end");
    return violations;
  }
  const TranscriptEntry& end = transcript[i];
  const std::uint32_t accepts =
      static_cast<std::uint32_t>(std::count(verdicts.begin(), verdicts.end(), 1));
  if (end.payload != accepts) {
    complain(round, "session end accept count disagrees with the verdicts");
  }
  if (i + 1 != transcript.size()) {
    complain(round, "frames after session end");
  }

  if (record.bits.size() != verdicts.size()) {
    complain(round, "record length disagrees with the transcript");
  } else {
    for (std::size_t r = 0; r < verdicts.size(); ++r) {
      if (static_cast<int>(record.bits[r]) != verdicts[r]) {
        complain(static_cast<std::uint32_t>(r),
                 "record bit disagrees with the transcript verdict");
      }
    }
  }
  return violations;
}

RealizedOperatorReport realized_operator(
    std::span<const TranscriptEntry> transcript, const SessionConfig& config) {
  config.validate();
  const Strategy uni_ab = build_uni_locc(config.theta_deg,
                                         Direction::kAliceToBob);
  const Strategy uni_ba = build_uni_locc(config.theta_deg,
                                         Direction::kBobToAlice);

  std::array<std::array<std::size_t, 3>, 2> counts{};
  std::size_t total = 0;
  for (const TranscriptEntry& entry : transcript) {
    if (entry.frame != FrameTag::kRoundStart) continue;
    const std::size_t direction = entry.payload & 1;
    const std::size_t setting = (entry.payload >> 1) & 0x3;
    if (setting > 2) continue;
    ++counts[direction][setting];
    ++total;
  }
  if (total == 0) {
    throw std::invalid_argument("realized_operator: no rounds in transcript");
  }

  Mat4 estimate = Mat4::Zero();
  bool low_confidence = false;
  for (std::size_t d = 0; d < 2; ++d) {
    const Strategy& strategy = d == 0 ? uni_ab : uni_ba;
    const bool direction_used =
        config.strategy == StrategyKind::kBiLocc ||
        (config.direction == Direction::kAliceToBob) == (d == 0);
    for (std::size_t l = 0; l < 3; ++l) {
      if (direction_used && counts[d][l] < 10) low_confidence = true;
      if (counts[d][l] == 0) continue;
      const double frequency = static_cast<double>(counts[d][l]) /
                               static_cast<double>(total);
      estimate += frequency *
                  strategy.settings()[l].effective_operator().entries();
    }
  }

  const HermitianOperator intended =
      config.strategy == StrategyKind::kBiLocc
          ? build_bi_locc(config.theta_deg).omega()
          : build_uni_locc(config.theta_deg, config.direction).omega();

  RealizedOperatorReport report{HermitianOperator(estimate), 0.0, 0.0,
                                low_confidence};
  report.frobenius_distance_to_intended =
      (estimate - intended.entries()).norm();
  report.implied_lambda2 =
      eigh(report.estimate).eigenvalues[1];
  return report;
}

void write_transcript_jsonl(const std::filesystem::path& file,
                            std::span<const TranscriptEntry> transcript) {
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open " + file.string() + " for writing");
  }
  for (const TranscriptEntry& entry : transcript) {
    out << entry.to_json().dump() << '\n';
  }
  if (!out.flush()) {
    throw std::runtime_error("failed writing " + file.string());
  }
}

std::vector<TranscriptEntry> read_transcript_jsonl(
    const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + file.string());
  }
  std::vector<TranscriptEntry> transcript;
  std::string line;
  const std::array<FrameTag, 6> tags = {
      FrameTag::kRoundStart, FrameTag::kMeasureRequest,
      FrameTag::kMeasureResult, FrameTag::kFeedForward, FrameTag::kVerdict,
      FrameTag::kSessionEnd};
  const std::array<Party, 3> parties = {Party::kAlice, Party::kBob,
                                        Party::kReferee};
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    TranscriptEntry entry;
    entry.round = j.at("round").get<std::uint32_t>();
    entry.payload = j.at("payload").get<std::uint32_t>();
    const std::string frame = j.at("frame").get<std::string>();
    const std::string party = j.at("party").get<std::string>();
    bool found = false;
    for (FrameTag tag : tags) {
      if (to_string(tag) == frame) {
        entry.frame = tag;
        found = true;
      }
    }
    if (!found) throw std::runtime_error("unknown frame name: " + frame);
    found = false;
    for (Party p : parties) {
      if (to_string(p) == party) {
        entry.party = p;
        found = true;
      }
    }
    if (!found) throw std::runtime_error("unknown party name: " + party);
    transcript.push_back(entry);
  }
  return transcript;
}

}  // namespace qsv
