#pragma once

#include "iolab/event_log.hpp"
#include "iolab/rng.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace iolab {

struct SbmParams {
    std::vector<std::size_t> block_sizes{100, 100};
    double p_intra = 0.08;
    double p_inter = 0.005;

    void validate() const;
};

// Undirected simple graph with sorted adjacency lists.
class FollowGraph {
public:
    FollowGraph() = default;
    explicit FollowGraph(std::size_t num_nodes) : adj_(num_nodes) {}

    void add_edge(AccountId u, AccountId v);
    void finalize();

    std::size_t num_nodes() const { return adj_.size(); }
    std::size_t num_edges() const { return num_edges_; }
    std::size_t degree(AccountId u) const { return adj_[u].size(); }
    const std::vector<AccountId>& neighbors(AccountId u) const { return adj_[u]; }
    bool has_edge(AccountId u, AccountId v) const;
    std::vector<std::pair<AccountId, AccountId>> edges() const;

private:
    std::vector<std::vector<AccountId>> adj_;
    std::size_t num_edges_ = 0;
};

struct SocialGraph {
    FollowGraph graph;
    std::vector<CommunityId> labels;
};

SocialGraph generate_social_graph(const SbmParams& params, std::uint64_t seed);

struct DiscourseParams {
    std::size_t num_topics = 5;
    std::size_t vocab_size = 500;
    double doc_topic_concentration = 0.3;
    double topic_word_concentration = 0.05;
    Timestamp horizon = 30 * kSecondsPerDay;
    double post_rate = 4.0;  // per account per day, all event kinds
    double repost_fraction = 0.35;
    double intra_bias = 0.9;
    // Share of arrivals that are mentions / replies / deletes of own posts.
    double mention_fraction = 0.10;
    double reply_fraction = 0.10;
    double delete_fraction = 0.01;
    // Extra Dirichlet mass on the account's community topic.
    double community_topic_boost = 1.0;
    std::size_t min_tokens = 8;
    std::size_t max_tokens = 20;
    std::size_t profile_tokens = 4;

    void validate() const;
    double per_second_rate() const { return post_rate / static_cast<double>(kSecondsPerDay); }
};

using TopicMatrix = std::vector<std::vector<double>>;

struct Discourse {
    EventLog log;
    // Planted topic-word distributions.
    TopicMatrix topics;
    // Community c is biased toward topic community_topic[c].
    std::vector<TopicId> community_topic;
};

Discourse generate_discourse(const SocialGraph& social, const DiscourseParams& params,
                             std::uint64_t seed);

// Samples a document of the given length from a topic mixture.
std::vector<TokenId> sample_document(Rng& rng, std::span<const double> mixture,
                                     const std::vector<CategoricalSampler>& topic_samplers,
                                     std::size_t length);

std::vector<CategoricalSampler> make_topic_samplers(const TopicMatrix& topics);

// Naive-Bayes topic of a token bag under the planted topics (uniform prior).
TopicId classify_tokens(std::span<const TokenId> tokens, const TopicMatrix& topics);

enum class ClientClass { first_party, popular_third_party, niche, restricted };

std::string_view to_string(ClientClass c);
ClientClass parse_client_class(std::string_view text);

struct ClientSpec {
    ClientId id = 0;
    std::string name;
    double weight = 1.0;
    ClientClass cls = ClientClass::first_party;
};

struct ClientCatalog {
    std::vector<ClientSpec> clients;

    void validate() const;
    bool contains(ClientId id) const;
    const ClientSpec& at(ClientId id) const;
    std::size_t size() const { return clients.size(); }

    static ClientCatalog defaults();
};

// Sparse usage distribution over clients, sorted by client id, summing to 1.
using ClientUsage = std::vector<std::pair<ClientId, double>>;

// Each account draws between 1 and mix_spread clients with replacement by
// popularity weight; usage proportions are draw multiplicities.
std::vector<ClientUsage> assign_clients(std::size_t num_accounts, const ClientCatalog& catalog,
                                        std::size_t mix_spread, std::uint64_t seed);

// Sets each event's client by sampling the author's usage distribution.
// Events with ids below first_id are left alone.
void assign_event_clients(EventLog& log, const std::vector<ClientUsage>& usage,
                          std::uint64_t seed, EventId first_id = 0);

}  // namespace iolab
