#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mailsig {

/// Opaque, corpus-stable identifier of one email account. When privacy mode
/// is on this is a salted hash of the address rather than the address itself.
using ActorId = std::string;

/// Half-open time window [start, end) in UTC seconds.
struct Period {
    std::int64_t start = 0;
    std::int64_t end = 0;

    bool contains(std::int64_t t) const { return t >= start && t < end; }
    std::int64_t length() const { return end - start; }
    bool operator==(const Period&) const = default;
};

/// One sent email after normalization. recipients is deduplicated, never
/// empty and never contains the sender.
struct EmailEvent {
    std::string message_id;
    ActorId sender;
    std::vector<ActorId> recipients;
    std::int64_t timestamp = 0;
    std::optional<std::string> in_reply_to;
    std::vector<std::string> tokens;  // empty when content withheld
};

/// HR controls plus the per-period top-performer flag.
struct ActorAttributes {
    ActorId actor;
    double age = 0;
    int band = 0;   // 1 = higher-level position
    double tenure = 0;
    double tslp = 0;
    std::vector<std::optional<int>> labels;  // one entry per period
};

struct Corpus {
    std::vector<EmailEvent> events;  // sorted by (timestamp, message_id)
    std::map<ActorId, ActorAttributes> attributes;
    std::vector<Period> periods;     // non-overlapping
};

/// Canonical event ordering used everywhere: timestamp, then message id.
inline bool event_order(const EmailEvent& a, const EmailEvent& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.message_id < b.message_id;
}

/// Contiguous slice of a sorted event list that falls inside the period.
std::span<const EmailEvent> events_in_period(std::span<const EmailEvent> events,
                                             const Period& period);

}  // namespace mailsig
