#pragma once

#include "iolab/event_log.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <vector>

namespace iolab {

struct WeightedEdge {
    AccountId u = 0;  // u < v
    AccountId v = 0;
    double weight = 0.0;

    bool operator==(const WeightedEdge&) const = default;
};

// Weighted undirected user-user graph; nodes and edges are kept sorted.
struct InteractionGraph {
    std::vector<AccountId> nodes;
    std::vector<WeightedEdge> edges;

    bool empty() const { return nodes.empty(); }
    double total_weight() const;
};

struct TimeWindow {
    Timestamp start = 0;
    Timestamp end = std::numeric_limits<Timestamp>::max();  // exclusive

    bool contains(Timestamp t) const { return start <= t && t < end; }
};

using KindFilter = std::set<EventKind>;

inline KindFilter positive_kinds() {
    return {EventKind::repost, EventKind::mention, EventKind::reply};
}

// Edge (u,v) weight = number of filtered interaction events between u and v
// whose timestamp falls in the window. Self-interactions are dropped.
InteractionGraph build_interaction_graph(const EventLog& log, const KindFilter& kinds = positive_kinds(),
                                         TimeWindow window = {});

struct Partition {
    std::vector<AccountId> nodes;      // sorted
    std::vector<CommunityId> labels;   // parallel to nodes, canonical numbering
    double modularity = 0.0;

    std::optional<CommunityId> label_of(AccountId a) const;
    std::size_t num_communities() const;
};

double modularity(const InteractionGraph& g, const Partition& p);

// Multi-level greedy modularity maximization (Louvain). Nodes are visited in a
// seeded permutation of the sorted node order; ties in gain go to the lowest
// candidate community id. Labels are renumbered by smallest member.
// resolution scales the null-model term of the gain; the reported
// modularity is always the standard one.
inline constexpr double kDefaultResolution = 0.5;
Partition detect_communities(const InteractionGraph& g, std::uint64_t seed,
                             double resolution = kDefaultResolution);

struct BrigadingParams {
    Timestamp window_len = kSecondsPerDay;
    double theta_rate = 3.0;
    double theta_discourse = 0.4;
    std::size_t baseline_windows = 7;
    // Accounts need this many interactions in a window to be judged.
    std::size_t min_account_interactions = 5;
};

struct WindowFinding {
    std::size_t window_index = 0;
    Timestamp start = 0;
    Timestamp end = 0;
    std::optional<CommunityId> community;  // set by the flood detector
    double observed = 0.0;
    double baseline = 0.0;
    double score = 0.0;
    std::vector<AccountId> accounts;
};

// Windows whose cross-community interaction count reaches theta_rate times the
// trailing median of the prior windows. Within them, accounts whose
// cross-community share exceeds theta_discourse and whose in-community
// reciprocal engagement is below the population median are flagged.
std::vector<WindowFinding> detect_brigading(const EventLog& log, const Partition& partition,
                                            const BrigadingParams& params = {});

struct FloodParams {
    Timestamp window_len = kSecondsPerDay;
    double theta_vol = 4.0;
    double theta_entropy = 0.5;
    std::size_t baseline_windows = 7;
};

// (window, community) pairs whose event volume reaches theta_vol times the
// trailing median while token entropy drops below theta_entropy times the
// trailing median entropy. Flags accounts whose window activity is mostly
// excess over their own trailing median.
std::vector<WindowFinding> detect_flood(const EventLog& log, const Partition& partition,
                                        const FloodParams& params = {});

// Number of windows of the given length covering the log.
std::size_t window_count(const EventLog& log, Timestamp window_len);

}  // namespace iolab
