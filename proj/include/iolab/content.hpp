#pragma once

#include "iolab/topic_model.hpp"

#include <array>
#include <map>
#include <optional>
#include <vector>

namespace iolab {

struct NarrativeParams {
    Timestamp window_len = kSecondsPerDay;
    double theta_amp = 2.0;
    // A topic has begun once its window volume exceeds this many events.
    double noise_floor = 5.0;
};

struct NarrativeScore {
    TopicId topic = 0;
    std::size_t onset_window = 0;
    double reposts = 0.0;
    double originals = 0.0;
    double growth = 0.0;
    double score = 0.0;
};

// One entry per topic that ever clears the noise floor. Repost and original
// counts cover the onset window and the one after it; growth is the volume
// ratio of the next window to the onset window.
std::vector<NarrativeScore> narrative_scores(const EventLog& log, const EventTopics& topics,
                                             const NarrativeParams& params = {});

// Topics whose score reaches theta_amp.
std::vector<NarrativeScore> detect_narrative_onset(const EventLog& log, const EventTopics& topics,
                                                   const NarrativeParams& params = {});

struct PivotParams {
    std::array<double, 3> weights{0.5, 0.3, 0.2};  // divergence, deletions, profile change
    double theta_pivot = 0.5;
    std::size_t min_posts = 10;
    std::size_t min_segment = 5;
    double min_segment_share = 0.2;

    void validate() const;
};

struct PivotScore {
    AccountId account = 0;
    Timestamp change_point = 0;
    double divergence = 0.0;
    double deletion_fraction = 0.0;
    bool profile_changed = false;
    double composite = 0.0;
};

enum class PivotStatus { flagged, not_flagged, too_few_posts };

struct PivotOutcome {
    PivotStatus status = PivotStatus::too_few_posts;
    std::optional<PivotScore> score;  // computed whenever there are enough posts
};

// Per-account view of posts, deletions and profile changes.
class PivotScanner {
public:
    PivotScanner(const EventLog& log, const EventTopics& topics);

    PivotOutcome scan(AccountId account, const PivotParams& params = {}) const;

private:
    struct Post {
        Timestamp ts;
        EventId id;
        TopicId topic;
    };
    std::map<AccountId, std::vector<Post>> posts_;
    std::map<AccountId, std::vector<EventId>> deleted_;
    std::map<AccountId, bool> profile_changed_;
    std::size_t num_topics_;
};

PivotOutcome detect_pivot(const EventLog& log, const EventTopics& topics, AccountId account,
                          const PivotParams& params = {});

struct AmplificationParams {
    std::array<double, 3> weights{0.4, 0.2, 0.4};  // repost share, regularity, synchrony
    Timestamp sync_window = 60;
    std::size_t min_events = 5;
    double theta = 0.6;
};

struct AmplificationScore {
    AccountId account = 0;
    double repost_share = 0.0;
    double regularity = 0.0;
    double synchrony = 0.0;
    double score = 0.0;
};

class AmplificationScorer {
public:
    explicit AmplificationScorer(const EventLog& log, const AmplificationParams& params = {});

    // nullopt below min_events.
    std::optional<AmplificationScore> score(AccountId account) const;
    // All scorable accounts in id order.
    std::vector<AmplificationScore> score_all() const;

private:
    struct Stamp {
        Timestamp ts;
        AccountId author;
        bool repost;
    };
    std::vector<Stamp> timeline_;  // sorted by ts
    std::map<AccountId, std::vector<std::size_t>> by_account_;
    AmplificationParams params_;
};

std::optional<AmplificationScore> score_amplification(const EventLog& log, AccountId account,
                                                      const AmplificationParams& params = {});

}  // namespace iolab
