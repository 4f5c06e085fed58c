#include "iolab/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

namespace iolab {

void SbmParams::validate() const {
    if (block_sizes.empty()) throw InvalidArgument("SbmParams: no blocks");
    for (auto s : block_sizes) {
        if (s == 0) throw InvalidArgument("SbmParams: block size 0");
    }
    if (!(0.0 <= p_inter && p_inter <= p_intra && p_intra <= 1.0)) {
        throw InvalidArgument("SbmParams: require 0 <= p_inter <= p_intra <= 1");
    }
}

void FollowGraph::add_edge(AccountId u, AccountId v) {
    if (u == v) return;
    adj_[u].push_back(v);
    adj_[v].push_back(u);
}

void FollowGraph::finalize() {
    num_edges_ = 0;
    for (auto& nbrs : adj_) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        num_edges_ += nbrs.size();
    }
    num_edges_ /= 2;
}

bool FollowGraph::has_edge(AccountId u, AccountId v) const {
    return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
}

std::vector<std::pair<AccountId, AccountId>> FollowGraph::edges() const {
    std::vector<std::pair<AccountId, AccountId>> out;
    out.reserve(num_edges_);
    for (AccountId u = 0; u < adj_.size(); ++u) {
        for (AccountId v : adj_[u]) {
            if (u < v) out.emplace_back(u, v);
        }
    }
    return out;
}

SocialGraph generate_social_graph(const SbmParams& params, std::uint64_t seed) {
    params.validate();
    SocialGraph out;
    for (std::size_t b = 0; b < params.block_sizes.size(); ++b) {
        out.labels.insert(out.labels.end(), params.block_sizes[b], static_cast<CommunityId>(b));
    }
    const auto n = out.labels.size();
    out.graph = FollowGraph(n);
    Rng rng = make_rng(seed, "sbm.edges");
    // Every unordered pair is an independent Bernoulli trial.
    for (AccountId u = 0; u < n; ++u) {
        for (AccountId v = u + 1; v < n; ++v) {
            const double p = out.labels[u] == out.labels[v] ? params.p_intra : params.p_inter;
            if (uniform01(rng) < p) out.graph.add_edge(u, v);
        }
    }
    out.graph.finalize();
    return out;
}

void DiscourseParams::validate() const {
    if (num_topics < 2) throw InvalidArgument("DiscourseParams: need at least 2 topics");
    if (vocab_size < num_topics) throw InvalidArgument("DiscourseParams: vocab smaller than topics");
    if (!(doc_topic_concentration > 0.0) || !(topic_word_concentration > 0.0)) {
        throw InvalidArgument("DiscourseParams: concentrations must be positive");
    }
    if (horizon < 0) throw InvalidArgument("DiscourseParams: negative horizon");
    if (post_rate < 0.0) throw InvalidArgument("DiscourseParams: negative post rate");
    if (!(0.0 <= repost_fraction && repost_fraction <= 1.0)) {
        throw InvalidArgument("DiscourseParams: repost_fraction outside [0,1]");
    }
    if (!(0.5 <= intra_bias && intra_bias <= 1.0)) {
        throw InvalidArgument("DiscourseParams: intra_bias outside [0.5,1]");
    }
    if (mention_fraction < 0.0 || reply_fraction < 0.0 || delete_fraction < 0.0 ||
        repost_fraction + mention_fraction + reply_fraction + delete_fraction > 1.0) {
        throw InvalidArgument("DiscourseParams: event kind fractions must sum to at most 1");
    }
    if (min_tokens == 0 || min_tokens > max_tokens) {
        throw InvalidArgument("DiscourseParams: bad token length range");
    }
    if (community_topic_boost < 0.0) throw InvalidArgument("DiscourseParams: negative boost");
}

std::vector<CategoricalSampler> make_topic_samplers(const TopicMatrix& topics) {
    std::vector<CategoricalSampler> out;
    out.reserve(topics.size());
    for (const auto& t : topics) out.emplace_back(t);
    return out;
}

std::vector<TokenId> sample_document(Rng& rng, std::span<const double> mixture,
                                     const std::vector<CategoricalSampler>& topic_samplers,
                                     std::size_t length) {
    std::vector<TokenId> doc(length);
    for (auto& w : doc) {
        const auto z = sample_index(rng, mixture);
        w = static_cast<TokenId>(topic_samplers[z](rng));
    }
    return doc;
}

TopicId classify_tokens(std::span<const TokenId> tokens, const TopicMatrix& topics) {
    TopicId best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (TopicId k = 0; k < topics.size(); ++k) {
        double ll = 0.0;
        for (TokenId w : tokens) ll += std::log(std::max(topics[k][w], 1e-300));
        if (ll > best_ll) {
            best_ll = ll;
            best = k;
        }
    }
    return best;
}

namespace {

class TargetPicker {
public:
    TargetPicker(const SocialGraph& social, double intra_bias)
        : social_(social), intra_bias_(intra_bias) {
        const auto n = social.labels.size();
        for (AccountId a = 0; a < n; ++a) members_[social.labels[a]].push_back(a);
    }

    AccountId pick(Rng& rng, AccountId a) const {
        const CommunityId own = social_.labels[a];
        bool stay = uniform01(rng) < intra_bias_;
        if (!stay && members_.size() < 2) stay = true;

        std::vector<AccountId> cands;
        for (AccountId v : social_.graph.neighbors(a)) {
            if ((social_.labels[v] == own) == stay) cands.push_back(v);
        }
        if (cands.empty()) {
            // No follow edge on that side: reach any account on that side.
            for (const auto& [c, ms] : members_) {
                if ((c == own) != stay) continue;
                for (AccountId v : ms) {
                    if (v != a) cands.push_back(v);
                }
            }
        }
        if (cands.empty()) return a;
        return cands[std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng)];
    }

private:
    const SocialGraph& social_;
    double intra_bias_;
    std::map<CommunityId, std::vector<AccountId>> members_;
};

constexpr std::size_t kRecentPosts = 8;

}  // namespace

Discourse generate_discourse(const SocialGraph& social, const DiscourseParams& params,
                             std::uint64_t seed) {
    params.validate();
    const auto n = social.labels.size();
    if (social.graph.num_nodes() != n) throw InvalidArgument("generate_discourse: graph/labels size mismatch");
    const auto K = params.num_topics;
    const auto V = params.vocab_size;

    Discourse out;
    {
        Rng rng = make_rng(seed, "discourse.topics");
        const std::vector<double> beta(V, params.topic_word_concentration);
        for (std::size_t k = 0; k < K; ++k) out.topics.push_back(sample_dirichlet(rng, beta));
    }
    CommunityId max_label = 0;
    for (auto l : social.labels) max_label = std::max(max_label, l);
    for (CommunityId c = 0; c <= max_label; ++c) {
        out.community_topic.push_back(static_cast<TopicId>(c % K));
    }
    const auto samplers = make_topic_samplers(out.topics);

    {
        Rng rng = make_rng(seed, "discourse.accounts");
        std::uniform_int_distribution<TokenId> tok(0, static_cast<TokenId>(V - 1));
        for (AccountId a = 0; a < n; ++a) {
            Account acc{a, 0, {}};
            for (std::size_t i = 0; i < params.profile_tokens; ++i) acc.profile.push_back(tok(rng));
            out.log.accounts.push_back(std::move(acc));
        }
    }

    // Homogeneous Poisson arrivals per account over [0, horizon).
    std::vector<std::pair<Timestamp, AccountId>> arrivals;
    const double expected = params.per_second_rate() * static_cast<double>(params.horizon);
    if (expected > 0.0) {
        for (AccountId a = 0; a < n; ++a) {
            Rng rng = make_rng(seed, "discourse.arrivals", a);
            const auto count = std::poisson_distribution<long>(expected)(rng);
            std::uniform_int_distribution<Timestamp> when(0, params.horizon - 1);
            for (long i = 0; i < count; ++i) arrivals.emplace_back(when(rng), a);
        }
    }
    std::sort(arrivals.begin(), arrivals.end());

    const TargetPicker picker(social, params.intra_bias);
    std::vector<std::vector<EventId>> recent(n);   // last posts, oldest first
    std::vector<std::vector<EventId>> live(n);     // undeleted own posts
    std::vector<std::vector<TokenId>> tokens_by_event;
    tokens_by_event.reserve(arrivals.size());

    Rng rng = make_rng(seed, "discourse.events");
    std::uniform_int_distribution<std::size_t> doc_len(params.min_tokens, params.max_tokens);
    auto draw_doc = [&](AccountId a) {
        std::vector<double> alpha(K, params.doc_topic_concentration);
        alpha[out.community_topic[social.labels[a]]] += params.community_topic_boost;
        const auto mixture = sample_dirichlet(rng, alpha);
        return sample_document(rng, mixture, samplers, doc_len(rng));
    };
    auto pick_from = [&](const std::vector<EventId>& v) {
        return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
    };

    const double c_repost = params.repost_fraction;
    const double c_mention = c_repost + params.mention_fraction;
    const double c_reply = c_mention + params.reply_fraction;
    const double c_delete = c_reply + params.delete_fraction;

    auto& events = out.log.events;
    events.reserve(arrivals.size());
    for (const auto& [ts, a] : arrivals) {
        Event e;
        e.id = events.size();
        e.ts = ts;
        e.author = a;
        const double u = uniform01(rng);
        if (u < c_repost || (u >= c_mention && u < c_reply)) {
            const AccountId t = picker.pick(rng, a);
            if (t != a && !recent[t].empty()) {
                e.kind = u < c_repost ? EventKind::repost : EventKind::reply;
                e.target = pick_from(recent[t]);
            } else {
                e.kind = EventKind::mention;
                e.target = t;
            }
        } else if (u < c_mention) {
            e.kind = EventKind::mention;
            e.target = picker.pick(rng, a);
        } else if (u < c_delete && !live[a].empty()) {
            e.kind = EventKind::del;
            e.target = pick_from(live[a]);
        } else {
            e.kind = EventKind::post;
        }
        if (e.kind == EventKind::mention && *e.target == a) {
            e.kind = EventKind::post;
            e.target.reset();
        }

        if (e.kind == EventKind::repost) {
            e.tokens = events[*e.target].tokens;
        } else if (is_authored_content(e.kind)) {
            e.tokens = draw_doc(a);
        }

        if (e.kind == EventKind::post) {
            live[a].push_back(e.id);
            recent[a].push_back(e.id);
            if (recent[a].size() > kRecentPosts) recent[a].erase(recent[a].begin());
        } else if (e.kind == EventKind::del) {
            std::erase(live[a], *e.target);
            std::erase(recent[a], *e.target);
        }
        events.push_back(std::move(e));
    }
    return out;
}

std::string_view to_string(ClientClass c) {
    switch (c) {
        case ClientClass::first_party: return "first_party";
        case ClientClass::popular_third_party: return "popular_third_party";
        case ClientClass::niche: return "niche";
        case ClientClass::restricted: return "restricted";
    }
    return "unknown";
}

ClientClass parse_client_class(std::string_view text) {
    if (text == "first_party") return ClientClass::first_party;
    if (text == "popular_third_party") return ClientClass::popular_third_party;
    if (text == "niche") return ClientClass::niche;
    if (text == "restricted") return ClientClass::restricted;
    throw InvalidArgument("unknown client class '" + std::string(text) + "'");
}

void ClientCatalog::validate() const {
    if (clients.empty()) throw InvalidArgument("ClientCatalog: empty catalog");
    bool first_party = false;
    for (std::size_t i = 0; i < clients.size(); ++i) {
        if (clients[i].id != i) throw InvalidArgument("ClientCatalog: ids must be dense and ordered");
        if (!(clients[i].weight > 0.0)) throw InvalidArgument("ClientCatalog: weights must be positive");
        first_party = first_party || clients[i].cls == ClientClass::first_party;
    }
    if (!first_party) throw InvalidArgument("ClientCatalog: no first_party client");
}

bool ClientCatalog::contains(ClientId id) const { return id < clients.size(); }

const ClientSpec& ClientCatalog::at(ClientId id) const {
    if (!contains(id)) throw InvalidArgument("ClientCatalog: unknown client " + std::to_string(id));
    return clients[id];
}

ClientCatalog ClientCatalog::defaults() {
    return ClientCatalog{{
        {0, "web", 0.50, ClientClass::first_party},
        {1, "mobile", 0.25, ClientClass::first_party},
        {2, "scheduler", 0.12, ClientClass::popular_third_party},
        {3, "retro-reader", 0.05, ClientClass::niche},
        {4, "analytics-desk", 0.05, ClientClass::niche},
        {5, "multi-poster", 0.03, ClientClass::popular_third_party},
        {6, "custom-panel", 0.02, ClientClass::restricted},
    }};
}

std::vector<ClientUsage> assign_clients(std::size_t num_accounts, const ClientCatalog& catalog,
                                        std::size_t mix_spread, std::uint64_t seed) {
    catalog.validate();
    if (mix_spread == 0) throw InvalidArgument("assign_clients: mix_spread must be >= 1");
    std::vector<double> weights(catalog.size(), 0.0);
    for (const auto& c : catalog.clients) {
        if (c.cls != ClientClass::restricted) weights[c.id] = c.weight;
    }
    const CategoricalSampler draw(weights);
    Rng rng = make_rng(seed, "clients.assign");
    std::uniform_int_distribution<std::size_t> how_many(1, mix_spread);
    std::vector<ClientUsage> out(num_accounts);
    for (auto& usage : out) {
        const auto draws = how_many(rng);
        std::map<ClientId, std::size_t> counts;
        for (std::size_t i = 0; i < draws; ++i) ++counts[static_cast<ClientId>(draw(rng))];
        for (const auto& [c, k] : counts) {
            usage.emplace_back(c, static_cast<double>(k) / static_cast<double>(draws));
        }
    }
    return out;
}

void assign_event_clients(EventLog& log, const std::vector<ClientUsage>& usage, std::uint64_t seed,
                          EventId first_id) {
    Rng rng = make_rng(seed, "clients.events");
    std::vector<std::vector<double>> weights(usage.size());
    for (std::size_t a = 0; a < usage.size(); ++a) {
        for (const auto& [_, p] : usage[a]) weights[a].push_back(p);
    }
    for (auto& e : log.events) {
        if (e.id < first_id || e.author >= usage.size() || usage[e.author].empty()) continue;
        const auto& u = usage[e.author];
        e.client = u.size() == 1 ? u.front().first : u[sample_index(rng, weights[e.author])].first;
    }
}

}  // namespace iolab
