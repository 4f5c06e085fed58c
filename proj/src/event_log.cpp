#include "iolab/event_log.hpp"

#include <algorithm>
#include <tuple>
#include <unordered_set>

namespace iolab {

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::post: return "post";
        case EventKind::repost: return "repost";
        case EventKind::mention: return "mention";
        case EventKind::reply: return "reply";
        case EventKind::del: return "delete";
        case EventKind::profile_change: return "profile_change";
    }
    return "unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
    if (text == "post") return EventKind::post;
    if (text == "repost") return EventKind::repost;
    if (text == "mention") return EventKind::mention;
    if (text == "reply") return EventKind::reply;
    if (text == "delete") return EventKind::del;
    if (text == "profile_change") return EventKind::profile_change;
    return std::nullopt;
}

std::vector<Violation> validate_event_log(const EventLog& log) {
    std::vector<Violation> out;
    auto report = [&](EventId id, const char* rule, std::string detail) {
        out.push_back(Violation{id, rule, std::move(detail)});
    };

    const auto n_accounts = log.accounts.size();
    for (std::size_t i = 0; i < n_accounts; ++i) {
        if (log.accounts[i].id != i) {
            report(0, rules::kAccountIds,
                   "account at position " + std::to_string(i) + " has id " +
                       std::to_string(log.accounts[i].id));
        }
    }

    // Earlier events seen so far: id -> (author, kind).
    std::unordered_map<EventId, std::pair<AccountId, EventKind>> seen;
    seen.reserve(log.events.size());
    std::unordered_set<EventId> deleted;
    std::vector<std::optional<Timestamp>> first_activity(n_accounts);

    const Event* prev = nullptr;
    for (const auto& e : log.events) {
        if (prev != nullptr) {
            if (e.ts < prev->ts) {
                report(e.id, rules::kTimestampOrder,
                       "ts " + std::to_string(e.ts) + " after " + std::to_string(prev->ts));
            } else if (e.ts == prev->ts && e.id < prev->id) {
                report(e.id, rules::kTimestampOrder, "tie not ordered by event_id");
            }
        }
        prev = &e;

        if (seen.contains(e.id)) {
            report(e.id, rules::kDuplicateId, "");
        }

        if (e.author >= n_accounts) {
            report(e.id, rules::kUnknownAuthor, "author " + std::to_string(e.author));
        } else if (!first_activity[e.author]) {
            first_activity[e.author] = e.ts;
        }

        if (requires_target(e.kind) && !e.target) {
            report(e.id, rules::kMissingTarget, std::string(to_string(e.kind)));
        }
        if (!requires_target(e.kind) && e.target) {
            report(e.id, rules::kUnexpectedTarget, std::string(to_string(e.kind)));
        }
        if ((e.kind == EventKind::del || e.kind == EventKind::profile_change) && !e.tokens.empty()) {
            report(e.id, rules::kUnexpectedTokens, std::string(to_string(e.kind)));
        }

        if (e.target && e.kind == EventKind::mention) {
            if (*e.target >= n_accounts) {
                report(e.id, rules::kInvalidMention, "account " + std::to_string(*e.target));
            }
        } else if (e.target && targets_event(e.kind)) {
            auto it = seen.find(*e.target);
            if (it == seen.end()) {
                report(e.id, rules::kTargetNotEarlier, "target " + std::to_string(*e.target));
            } else {
                const auto [target_author, target_kind] = it->second;
                if (target_kind == EventKind::del || target_kind == EventKind::profile_change) {
                    report(e.id, rules::kTargetNotContent, "target " + std::to_string(*e.target));
                }
                if (e.kind == EventKind::del) {
                    if (target_author != e.author) {
                        report(e.id, rules::kDeleteForeign,
                               "target " + std::to_string(*e.target) + " by " +
                                   std::to_string(target_author));
                    }
                    if (!deleted.insert(*e.target).second) {
                        report(e.id, rules::kDoubleDelete, "target " + std::to_string(*e.target));
                    }
                }
            }
        }
        seen.emplace(e.id, std::make_pair(e.author, e.kind));
    }

    for (std::size_t a = 0; a < n_accounts; ++a) {
        if (first_activity[a] && log.accounts[a].created_at > *first_activity[a]) {
            report(0, rules::kCreatedAfterActivity,
                   "account " + std::to_string(a) + " created " +
                       std::to_string(log.accounts[a].created_at) + " first event " +
                       std::to_string(*first_activity[a]));
        }
    }

    std::sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        return std::tie(a.event_id, a.rule, a.detail) < std::tie(b.event_id, b.rule, b.detail);
    });
    return out;
}

EventIndex::EventIndex(const EventLog& log) : log_(&log) {
    pos_.reserve(log.events.size());
    for (std::size_t i = 0; i < log.events.size(); ++i) {
        pos_.emplace(log.events[i].id, i);
    }
}

std::optional<std::size_t> EventIndex::position(EventId id) const {
    auto it = pos_.find(id);
    if (it == pos_.end()) return std::nullopt;
    return it->second;
}

const Event* EventIndex::find(EventId id) const {
    auto p = position(id);
    return p ? &log_->events[*p] : nullptr;
}

std::optional<AccountId> EventIndex::interaction_target(const Event& e) const {
    if (!e.target) return std::nullopt;
    if (e.kind == EventKind::mention) return static_cast<AccountId>(*e.target);
    if (e.kind == EventKind::repost || e.kind == EventKind::reply) {
        if (const Event* t = find(*e.target)) return t->author;
    }
    return std::nullopt;
}

const Event* EventIndex::content_origin(const Event& e) const {
    const Event* cur = &e;
    // Repost chains are acyclic because targets are strictly earlier.
    while (cur != nullptr && cur->kind == EventKind::repost && cur->target) {
        cur = find(*cur->target);
    }
    if (cur == nullptr || !is_authored_content(cur->kind)) return nullptr;
    return cur;
}

void sort_canonical(std::vector<Event>& events) {
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        return std::tie(a.ts, a.id) < std::tie(b.ts, b.id);
    });
}

Timestamp log_end(const EventLog& log) {
    return log.events.empty() ? 0 : log.events.back().ts;
}

EventId max_event_id(const EventLog& log) {
    EventId m = 0;
    for (const auto& e : log.events) m = std::max(m, e.id);
    return m;
}

}  // namespace iolab
