#ifndef CPARK_NETSIM_HPP
#define CPARK_NETSIM_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpark/error.hpp"
#include "cpark/rng.hpp"

namespace cpark {

struct ChannelModel {
    double drop_prob = 0.0;
    double per_round_delay_ms = 200.0;
    std::uint64_t seed = 0;
};

inline void validate(const ChannelModel& ch) {
    if (!(ch.drop_prob >= 0.0 && ch.drop_prob <= 1.0)) throw InvalidConfig("drop probability must lie in [0, 1]");
    if (!(ch.per_round_delay_ms >= 0.0)) throw InvalidConfig("per-round delay must be nonnegative");
}

enum class Direction : std::uint8_t { Downlink = 0, Uplink = 1 };

/// Last successfully received value per endpoint, with the round it arrived
/// in. Stamp -1 is the initial content.
template <class T>
class Mailbox {
public:
    Mailbox() = default;
    Mailbox(int endpoints, const T& initial)
        : values_(static_cast<std::size_t>(endpoints), initial), stamps_(static_cast<std::size_t>(endpoints), -1) {}

    const T& value(int endpoint) const { return values_[static_cast<std::size_t>(endpoint)]; }
    int stamp(int endpoint) const { return stamps_[static_cast<std::size_t>(endpoint)]; }
    int size() const { return static_cast<int>(values_.size()); }

    void store(int endpoint, const T& v, int round) {
        values_[static_cast<std::size_t>(endpoint)] = v;
        stamps_[static_cast<std::size_t>(endpoint)] = round;
    }

private:
    std::vector<T> values_;
    std::vector<int> stamps_;
};

struct NetStats {
    long long endpoint_rounds = 0;
    long long stale_reads = 0;
    int rounds = 0;
    double simulated_delay_ms = 0.0;
};

inline double stale_fraction(const NetStats& s) {
    return s.endpoint_rounds == 0 ? 0.0 : static_cast<double>(s.stale_reads) / static_cast<double>(s.endpoint_rounds);
}

/// Synchronous lossy channel between a control center and a set of endpoints.
/// Whether a packet is dropped is a pure function of (seed, round, direction,
/// endpoint), so every run replays exactly.
class Network {
public:
    Network(ChannelModel channel, int endpoints) : channel_(channel), endpoints_(endpoints) { validate(channel_); }

    const ChannelModel& channel() const { return channel_; }
    int endpoints() const { return endpoints_; }
    const NetStats& stats() const { return stats_; }

    bool dropped(int round, Direction dir, int endpoint) const {
        if (channel_.drop_prob <= 0.0) return false;
        if (channel_.drop_prob >= 1.0) return true;
        return keyed_uniform01(channel_.seed, static_cast<std::uint64_t>(round),
                               static_cast<std::uint64_t>(dir), static_cast<std::uint64_t>(endpoint)) <
               channel_.drop_prob;
    }

    /// Delivers one packet per endpoint. Dropped packets leave the mailbox
    /// untouched and count as stale reads. Returns the delivery mask.
    template <class T>
    std::vector<bool> deliver_round(std::span<const T> payloads, Mailbox<T>& mailbox, Direction dir, int round) {
        if (static_cast<int>(payloads.size()) != endpoints_ || mailbox.size() != endpoints_)
            throw Error("payload count does not match endpoint count");
        std::vector<bool> delivered(static_cast<std::size_t>(endpoints_));
        std::string bits(static_cast<std::size_t>(endpoints_), '0');
        for (int e = 0; e < endpoints_; ++e) {
            const bool drop = dropped(round, dir, e);
            delivered[static_cast<std::size_t>(e)] = !drop;
            if (drop) {
                ++stats_.stale_reads;
                bits[static_cast<std::size_t>(e)] = '1';
            } else {
                mailbox.store(e, payloads[static_cast<std::size_t>(e)], round);
            }
        }
        stats_.endpoint_rounds += endpoints_;
        bitmap_.push_back(std::to_string(round) + (dir == Direction::Downlink ? " down " : " up ") + bits);
        return delivered;
    }

    /// Closes a round: the delay is charged once per round, not per packet.
    void end_round() {
        ++stats_.rounds;
        stats_.simulated_delay_ms += channel_.per_round_delay_ms;
    }

    /// One line per (round, direction): a '1' per dropped endpoint packet.
    std::string drop_bitmap() const {
        std::string out;
        for (const std::string& line : bitmap_) out += line + '\n';
        return out;
    }

private:
    ChannelModel channel_;
    int endpoints_ = 0;
    NetStats stats_;
    std::vector<std::string> bitmap_;
};

}  // namespace cpark

#endif  // CPARK_NETSIM_HPP
