#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "scol/errors.hpp"
#include "scol/ring.hpp"

namespace scol {

// Party indices are 0..p-1; the dealer uses a sentinel id.
using PartyId = int;
constexpr PartyId kDealer = 255;

enum class PhaseTag : std::uint8_t {
    LOCAL_TRAIN = 0,
    SECURE_TRAIN = 1,
    OPEN = 2,
    RANDOMNESS = 3,
    CONTROL = 4,
};

constexpr std::uint32_t kWireMagic = 0x53434F4C;  // "SCOL"
constexpr std::uint8_t kWireVersion = 0x01;

struct Message {
    std::uint8_t msg_type = 0;
    u64 session_id = 0;
    PartyId sender = 0;
    PartyId receiver = 0;
    PhaseTag phase = PhaseTag::CONTROL;
    u64 sequence = 0;
    std::vector<std::uint8_t> payload;
};

// magic(4, big-endian "SCOL"), version(1), msg_type(1), session_id(8 LE),
// sender(1), receiver(1), phase(1), sequence(8 LE), payload_len(4 LE), payload.
std::vector<std::uint8_t> frame_message(const Message& m);
Message parse_message(const std::uint8_t* data, std::size_t len);
constexpr std::size_t kFrameHeaderSize = 4 + 1 + 1 + 8 + 1 + 1 + 1 + 8 + 4;

struct PhaseStats {
    u64 bytes_out = 0;
    u64 bytes_in = 0;
    u64 rounds = 0;
    double millis = 0.0;
};

// Per-party traffic accounting. Byte counts are payload bytes; rounds count
// synchronous open barriers, not messages.
struct TrafficStats {
    std::map<std::string, PhaseStats> phases;

    u64 total_bytes_out() const {
        u64 t = 0;
        for (auto& [k, v] : phases) t += v.bytes_out;
        return t;
    }
    u64 total_rounds() const {
        u64 t = 0;
        for (auto& [k, v] : phases) t += v.rounds;
        return t;
    }
    std::string report() const;
};

// In-process loss-free network between p parties. Delivery is in-order per
// directed channel; every framed message is folded into a transcript hash so
// two runs can be compared byte-for-byte.
class InProcNet {
  public:
    explicit InProcNet(int parties, u64 session_id = 1);

    void send(Message m);
    Message recv(PartyId receiver, PartyId from);

    int parties() const { return parties_; }
    u64 session_id() const { return session_id_; }
    TrafficStats& stats(PartyId p) { return stats_.at(static_cast<std::size_t>(p)); }
    const TrafficStats& stats(PartyId p) const { return stats_.at(static_cast<std::size_t>(p)); }

    // Current accounting label; opens and sends are attributed to it.
    void set_phase_label(std::string label) { phase_label_ = std::move(label); }
    const std::string& phase_label() const { return phase_label_; }

    void count_round() {
        for (auto& s : stats_) s.phases[phase_label_].rounds += 1;
    }

    u64 transcript_hash() const { return transcript_hash_; }
    u64 messages_sent() const { return messages_sent_; }

  private:
    int parties_;
    u64 session_id_;
    std::string phase_label_ = "secure";
    std::map<std::pair<PartyId, PartyId>, std::deque<Message>> channels_;
    std::map<std::pair<PartyId, PartyId>, u64> seq_;
    std::vector<TrafficStats> stats_;
    u64 transcript_hash_ = 14695981039346656037ull;  // FNV-1a
    u64 messages_sent_ = 0;
};

// Minimal blocking TCP transport speaking the same framing. Not used by the
// in-process protocol engine; provided for cross-machine experiments.
class TcpChannel {
  public:
    static TcpChannel listen_accept(int port);
    static TcpChannel connect_to(const std::string& host, int port);
    ~TcpChannel();
    TcpChannel(TcpChannel&& other) noexcept;
    TcpChannel(const TcpChannel&) = delete;

    void send(const Message& m);
    Message recv();

  private:
    explicit TcpChannel(int fd) : fd_(fd) {}
    int fd_ = -1;
};

}  // namespace scol
