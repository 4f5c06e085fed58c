#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace iolab {

// Dense identifiers, 0..N-1 within a dataset.
using AccountId = std::uint32_t;
using ClientId = std::uint32_t;
using TopicId = std::uint32_t;
using TokenId = std::uint32_t;
using CommunityId = std::uint32_t;
using EventId = std::uint64_t;

// Integer seconds since the scenario epoch.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerDay = 86400;
inline constexpr Timestamp kSecondsPerHour = 3600;

enum class EventKind : std::uint8_t { post, repost, mention, reply, del, profile_change };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

// True for the kinds that must carry a target.
constexpr bool requires_target(EventKind kind) {
    return kind == EventKind::repost || kind == EventKind::mention || kind == EventKind::reply ||
           kind == EventKind::del;
}

// Kinds whose target is an event id (mention targets an account).
constexpr bool targets_event(EventKind kind) {
    return kind == EventKind::repost || kind == EventKind::reply || kind == EventKind::del;
}

// Positive-sentiment interactions used for the interaction graph.
constexpr bool is_interaction(EventKind kind) {
    return kind == EventKind::repost || kind == EventKind::mention || kind == EventKind::reply;
}

// Kinds that carry authored token content (documents for topic modeling).
constexpr bool is_authored_content(EventKind kind) {
    return kind == EventKind::post || kind == EventKind::mention || kind == EventKind::reply;
}

struct Event {
    EventId id = 0;
    Timestamp ts = 0;
    AccountId author = 0;
    EventKind kind = EventKind::post;
    // Event id for repost/reply/delete, account id for mention.
    std::optional<std::uint64_t> target;
    ClientId client = 0;
    std::vector<TokenId> tokens;
    std::optional<std::string> geo;

    bool operator==(const Event&) const = default;
};

struct Account {
    AccountId id = 0;
    Timestamp created_at = 0;
    std::vector<TokenId> profile;

    bool operator==(const Account&) const = default;
};

// Events are kept in canonical order: by timestamp, ties by event id.
struct EventLog {
    std::vector<Account> accounts;
    std::vector<Event> events;

    std::size_t num_accounts() const { return accounts.size(); }
    bool operator==(const EventLog&) const = default;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition or parameter violation on an operation.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace iolab
