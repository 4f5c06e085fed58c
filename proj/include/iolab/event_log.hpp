#pragma once

#include "iolab/types.hpp"

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace iolab {

struct Violation {
    EventId event_id = 0;
    std::string rule;
    std::string detail;

    bool operator==(const Violation&) const = default;
};

// Rule names reported by validate_event_log.
namespace rules {
inline constexpr const char* kTimestampOrder = "timestamp_order";
inline constexpr const char* kDuplicateId = "duplicate_event_id";
inline constexpr const char* kUnknownAuthor = "unknown_author";
inline constexpr const char* kMissingTarget = "missing_target";
inline constexpr const char* kUnexpectedTarget = "unexpected_target";
inline constexpr const char* kTargetNotEarlier = "target_not_earlier";
inline constexpr const char* kTargetNotContent = "target_not_content";
inline constexpr const char* kInvalidMention = "invalid_mention_target";
inline constexpr const char* kDeleteForeign = "delete_foreign_event";
inline constexpr const char* kDoubleDelete = "double_delete";
inline constexpr const char* kUnexpectedTokens = "unexpected_tokens";
inline constexpr const char* kAccountIds = "account_ids_not_dense";
inline constexpr const char* kCreatedAfterActivity = "account_created_after_activity";
}  // namespace rules

// Returns every invariant violation, sorted by (event_id, rule, detail).
// An empty result means the log is valid.
std::vector<Violation> validate_event_log(const EventLog& log);

// Maps event ids to positions in a log.
class EventIndex {
public:
    explicit EventIndex(const EventLog& log);

    std::optional<std::size_t> position(EventId id) const;
    const Event* find(EventId id) const;

    // The account on the receiving end of an interaction, if any.
    std::optional<AccountId> interaction_target(const Event& e) const;

    // Follows repost chains back to the authored event carrying the content.
    const Event* content_origin(const Event& e) const;

private:
    const EventLog* log_;
    std::unordered_map<EventId, std::size_t> pos_;
};

// Sorts by (ts, id).
void sort_canonical(std::vector<Event>& events);

Timestamp log_end(const EventLog& log);
EventId max_event_id(const EventLog& log);

}  // namespace iolab
