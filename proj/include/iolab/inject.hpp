#pragma once

#include "iolab/ground_truth.hpp"
#include "iolab/simgen.hpp"

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace iolab {

// Operators embedded in each community core, posting the community's dominant
// topic and reposting its members' dominant-topic posts.
struct CoreEmbed {
    std::size_t ops_per_community = 5;
    // Operator reposts per amplified post, as a multiple of the community's
    // organic reposts-per-post ratio.
    double amplify_factor = 5.0;
};

// Operators that talk into two communities at once during a window and
// provoke replies across the divide.
struct Bridge {
    std::size_t num_bridges = 5;
    std::optional<TopicId> shared_topic;  // unset: first topic owned by neither side
    double cross_rate = 10.0;             // interactions per day with each side
    Timestamp start = 15 * kSecondsPerDay;
    Timestamp end = 19 * kSecondsPerDay;
    // Expected replies drawn from the opposite side per bridge interaction.
    double reaction_rate = 1.0;
    CommunityId side_a = 0;
    CommunityId side_b = 1;
};

struct PumpAndPivot {
    std::size_t num_ops = 20;
    Timestamp pivot_time = 15 * kSecondsPerDay;
    std::optional<TopicId> pre_topic;   // unset: globally most popular topic
    std::optional<TopicId> post_topic;  // unset: globally least popular topic
    double deletion_fraction = 0.7;
    bool profile_change = true;
    // Expected organic reposts gained per pre-pivot post.
    double induced_repost_rate = 1.0;
};

struct Flood {
    CommunityId target_community = 0;
    Timestamp start = 20 * kSecondsPerDay;
    Timestamp end = 21 * kSecondsPerDay;
    // Flood volume as a multiple of the community's organic event rate.
    double rate_multiplier = 8.0;
    std::size_t num_accounts = 10;
    std::size_t low_entropy_tokens = 4;
    double mention_share = 0.5;
};

struct Bolster {
    CommunityId target_community = 0;
    double amplify_factor = 5.0;
    std::size_t num_ops = 5;
    Timestamp start = 10 * kSecondsPerDay;
    Timestamp end = 20 * kSecondsPerDay;
};

struct Degrade {
    CommunityId target_community = 0;
    std::pair<TopicId, TopicId> divisive_topic_pair{2, 3};
    std::size_t ops_per_faction = 3;
    Timestamp start = 10 * kSecondsPerDay;
    Timestamp end = 20 * kSecondsPerDay;
    double action_rate = 8.0;  // per operator per day
    std::size_t max_chain = 4;
};

using Playbook = std::variant<CoreEmbed, Bridge, PumpAndPivot, Flood, Bolster, Degrade>;

std::string playbook_tag(const Playbook& pb);

struct InjectionContext {
    const FollowGraph* graph = nullptr;
    // Community per account of the input log; the first num_organic are organic.
    std::vector<CommunityId> labels;
    std::size_t num_organic = 0;
    TopicMatrix topics;
    DiscourseParams params;
};

struct Injection {
    EventLog log;
    // Operators and windows added by this injection; communities cover log′.
    GroundTruth truth;
};

Injection inject_core_embed(const EventLog& log, const InjectionContext& ctx, const CoreEmbed& pb,
                            std::uint64_t seed);
Injection inject_bridge(const EventLog& log, const InjectionContext& ctx, const Bridge& pb,
                        std::uint64_t seed);
Injection inject_pump_and_pivot(const EventLog& log, const InjectionContext& ctx,
                                const PumpAndPivot& pb, std::uint64_t seed);
Injection inject_flood(const EventLog& log, const InjectionContext& ctx, const Flood& pb,
                       std::uint64_t seed);
Injection inject_bolster_degrade(const EventLog& log, const InjectionContext& ctx,
                                 const std::variant<Bolster, Degrade>& pb, std::uint64_t seed);

Injection inject(const EventLog& log, const InjectionContext& ctx, const Playbook& pb,
                 std::uint64_t seed);

// Appends b's operators and windows to a and takes b's community map.
void merge_truth(GroundTruth& a, const GroundTruth& b);

struct OperatorStackPolicy {
    ClientId restricted_client = 6;
    std::size_t controller_fanout = 5;
    Timestamp timing_jitter = 60;
    std::vector<std::string> geo_tags{"geo:xa", "geo:xb"};
    // Controllers fire their accounts at the end of each slot.
    Timestamp sync_slot = 900;
    double restricted_share = 0.9;

    void validate() const;
};

struct StackedLog {
    EventLog log;
    GroundTruth truth;  // controller groups filled in
};

StackedLog apply_operator_stack(const EventLog& log, const GroundTruth& truth,
                                const OperatorStackPolicy& policy, const ClientCatalog& catalog,
                                std::uint64_t seed);

}  // namespace iolab
