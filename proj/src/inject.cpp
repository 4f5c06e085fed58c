#include "iolab/inject.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

namespace iolab {

namespace {

constexpr EventId kProvisionalBit = EventId{1} << 62;
constexpr Timestamp kDormancy = kSecondsPerDay;

bool is_provisional(EventId id) { return (id & kProvisionalBit) != 0; }

// Shared view of the input log plus an append buffer for injected records.
class Injector {
public:
    Injector(const EventLog& base, const InjectionContext& ctx) : base_(base), ctx_(ctx) {
        if (ctx.labels.size() != base.accounts.size()) {
            throw InvalidArgument("injection context labels do not cover the log's accounts");
        }
        if (ctx.num_organic > ctx.labels.size()) {
            throw InvalidArgument("injection context num_organic exceeds account count");
        }
        labels_ = ctx.labels;
        for (AccountId a = 0; a < ctx.num_organic; ++a) members_[ctx.labels[a]].push_back(a);

        std::set<EventId> deleted;
        for (const auto& e : base.events) {
            if (e.kind == EventKind::del && e.target) deleted.insert(*e.target);
        }
        posts_by_.resize(base.accounts.size());
        for (const auto& e : base.events) {
            if (e.kind == EventKind::post && !deleted.contains(e.id)) {
                posts_by_[e.author].push_back(&e);
            }
        }
    }

    const InjectionContext& ctx() const { return ctx_; }
    const EventLog& base() const { return base_; }
    Timestamp horizon() const { return ctx_.params.horizon; }

    const std::vector<AccountId>& members(CommunityId c) const {
        static const std::vector<AccountId> none;
        auto it = members_.find(c);
        return it == members_.end() ? none : it->second;
    }
    std::vector<CommunityId> communities() const {
        std::vector<CommunityId> out;
        for (const auto& [c, _] : members_) out.push_back(c);
        return out;
    }
    CommunityId label(AccountId a) const { return labels_[a]; }

    // Latest surviving organic post by `a` strictly before `t`.
    const Event* latest_post_before(AccountId a, Timestamp t) const {
        const auto& v = posts_by_[a];
        auto it = std::lower_bound(v.begin(), v.end(), t,
                                   [](const Event* e, Timestamp x) { return e->ts < x; });
        return it == v.begin() ? nullptr : *(it - 1);
    }

    AccountId add_account(Rng& rng, CommunityId community) {
        const auto id = static_cast<AccountId>(base_.accounts.size() + new_accounts_.size());
        Account acc{id, 0, {}};
        std::uniform_int_distribution<TokenId> tok(0, static_cast<TokenId>(ctx_.params.vocab_size - 1));
        for (std::size_t i = 0; i < ctx_.params.profile_tokens; ++i) acc.profile.push_back(tok(rng));
        new_accounts_.push_back(std::move(acc));
        labels_.push_back(community);
        return id;
    }

    // Returns a provisional id usable as a target by later injected events.
    EventId add_event(Event e) {
        e.id = kProvisionalBit | injected_.size();
        injected_.push_back(std::move(e));
        return injected_.back().id;
    }

    Injection finish(GroundTruth truth) {
        // Rank injected events by (ts, creation order); targets were always created
        // earlier with ts no later, so ranks respect the target-precedes rule.
        std::vector<std::size_t> order(injected_.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return injected_[a].ts < injected_[b].ts;
        });
        const EventId first_id = base_.events.empty() ? 0 : max_event_id(base_) + 1;
        std::vector<EventId> final_id(injected_.size());
        for (std::size_t r = 0; r < order.size(); ++r) final_id[order[r]] = first_id + r;

        Injection out;
        out.log.accounts = base_.accounts;
        out.log.accounts.insert(out.log.accounts.end(), new_accounts_.begin(), new_accounts_.end());
        std::vector<Event> added;
        added.reserve(injected_.size());
        for (std::size_t i = 0; i < injected_.size(); ++i) {
            Event e = injected_[i];
            e.id = final_id[i];
            if (e.target && targets_event(e.kind) && is_provisional(*e.target)) {
                e.target = final_id[*e.target & ~kProvisionalBit];
            }
            added.push_back(std::move(e));
        }
        sort_canonical(added);
        out.log.events.reserve(base_.events.size() + added.size());
        std::merge(base_.events.begin(), base_.events.end(), added.begin(), added.end(),
                   std::back_inserter(out.log.events), [](const Event& a, const Event& b) {
                       return std::tie(a.ts, a.id) < std::tie(b.ts, b.id);
                   });
        truth.communities = labels_;
        truth.topics = ctx_.topics;
        out.truth = std::move(truth);
        return out;
    }

private:
    const EventLog& base_;
    const InjectionContext& ctx_;
    std::vector<CommunityId> labels_;
    std::map<CommunityId, std::vector<AccountId>> members_;
    std::vector<std::vector<const Event*>> posts_by_;
    std::vector<Account> new_accounts_;
    std::vector<Event> injected_;
};

std::vector<double> one_hot(std::size_t k, TopicId t) {
    std::vector<double> v(k, 0.0);
    v[t] = 1.0;
    return v;
}

std::vector<double> blend(std::size_t k, TopicId a, TopicId b) {
    std::vector<double> v(k, 0.0);
    v[a] += 0.5;
    v[b] += 0.5;
    return v;
}

std::vector<Timestamp> poisson_times(Rng& rng, double per_day, Timestamp from, Timestamp to) {
    std::vector<Timestamp> out;
    if (to <= from || per_day <= 0.0) return out;
    const double mean = per_day * static_cast<double>(to - from) / static_cast<double>(kSecondsPerDay);
    const auto n = std::poisson_distribution<long>(mean)(rng);
    std::uniform_int_distribution<Timestamp> when(from, to - 1);
    for (long i = 0; i < n; ++i) out.push_back(when(rng));
    std::sort(out.begin(), out.end());
    return out;
}

Timestamp exp_delay(Rng& rng, double mean_seconds) {
    return 1 + static_cast<Timestamp>(std::exponential_distribution<double>(1.0 / mean_seconds)(rng));
}

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

std::size_t doc_length(Rng& rng, const DiscourseParams& p) {
    return std::uniform_int_distribution<std::size_t>(p.min_tokens, p.max_tokens)(rng);
}

// Topic usage of organic posts under the planted topics.
std::vector<double> organic_topic_counts(const Injector& inj) {
    std::vector<double> counts(inj.ctx().topics.size(), 0.0);
    for (const auto& e : inj.base().events) {
        if (e.kind == EventKind::post && e.author < inj.ctx().num_organic) {
            counts[classify_tokens(e.tokens, inj.ctx().topics)] += 1.0;
        }
    }
    return counts;
}

TopicId dominant_topic(const Injector& inj, CommunityId c) {
    std::vector<double> counts(inj.ctx().topics.size(), 0.0);
    for (const auto& e : inj.base().events) {
        if (e.kind == EventKind::post && e.author < inj.ctx().num_organic && inj.label(e.author) == c) {
            counts[classify_tokens(e.tokens, inj.ctx().topics)] += 1.0;
        }
    }
    return static_cast<TopicId>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

// Organic reposts received per organic post, for posts authored in community c.
double organic_repost_ratio(const Injector& inj, CommunityId c) {
    const auto n_org = inj.ctx().num_organic;
    const EventIndex index(inj.base());
    double posts = 0.0, reposts = 0.0;
    for (const auto& e : inj.base().events) {
        if (e.author >= n_org) continue;
        if (e.kind == EventKind::post && inj.label(e.author) == c) posts += 1.0;
        if (e.kind == EventKind::repost) {
            const Event* t = index.find(*e.target);
            if (t && t->author < n_org && inj.label(t->author) == c) reposts += 1.0;
        }
    }
    return posts > 0.0 ? reposts / posts : 0.0;
}

void require_members(const Injector& inj, CommunityId c, const char* what) {
    if (inj.members(c).empty()) {
        throw InvalidArgument(std::string(what) + ": community " + std::to_string(c) + " has no members");
    }
}

// Operators repost each qualifying post Poisson(rate) times, shortly after it.
void amplify_posts(Injector& inj, Rng& rng, const std::vector<AccountId>& ops,
                   const std::vector<Timestamp>& op_start, CommunityId c,
                   std::optional<TopicId> only_topic, double rate, Timestamp from, Timestamp to) {
    if (ops.empty() || rate <= 0.0) return;
    const auto horizon = inj.horizon();
    std::poisson_distribution<int> count(rate);
    for (const auto& e : inj.base().events) {
        if (e.kind != EventKind::post || e.author >= inj.ctx().num_organic) continue;
        if (inj.label(e.author) != c || e.ts < from || e.ts >= to) continue;
        if (only_topic && classify_tokens(e.tokens, inj.ctx().topics) != *only_topic) continue;
        const int k = count(rng);
        for (int i = 0; i < k; ++i) {
            const std::size_t which = std::uniform_int_distribution<std::size_t>(0, ops.size() - 1)(rng);
            if (op_start[which] > e.ts) continue;
            const Timestamp ts = e.ts + exp_delay(rng, 1800.0);
            if (ts >= horizon) continue;
            Event r;
            r.ts = ts;
            r.author = ops[which];
            r.kind = EventKind::repost;
            r.target = e.id;
            r.tokens = e.tokens;
            inj.add_event(std::move(r));
        }
    }
}

void check_window(Timestamp start, Timestamp end, Timestamp horizon, const char* what) {
    if (!(0 <= start && start < end && end <= horizon)) {
        throw InvalidArgument(std::string(what) + ": window must satisfy 0 <= start < end <= horizon");
    }
}

}  // namespace

std::string playbook_tag(const Playbook& pb) {
    return std::visit(
        [](const auto& p) -> std::string {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, CoreEmbed>) return roles::kCoreEmbed;
            else if constexpr (std::is_same_v<T, Bridge>) return roles::kBridge;
            else if constexpr (std::is_same_v<T, PumpAndPivot>) return roles::kPumpAndPivot;
            else if constexpr (std::is_same_v<T, Flood>) return roles::kFlood;
            else if constexpr (std::is_same_v<T, Bolster>) return roles::kBolster;
            else return roles::kDegrade;
        },
        pb);
}

Injection inject_core_embed(const EventLog& log, const InjectionContext& ctx, const CoreEmbed& pb,
                            std::uint64_t seed) {
    Injector inj(log, ctx);
    GroundTruth truth;
    if (pb.ops_per_community == 0) return inj.finish(std::move(truth));
    if (pb.amplify_factor < 0.0) throw InvalidArgument("CoreEmbed: negative amplify_factor");

    Rng rng = make_rng(seed, "inject.core_embed");
    const auto& p = ctx.params;
    const auto K = ctx.topics.size();
    const auto samplers = make_topic_samplers(ctx.topics);
    const double post_rate = p.post_rate * std::max(0.0, 1.0 - p.repost_fraction - p.mention_fraction -
                                                            p.reply_fraction - p.delete_fraction);
    const double mention_rate = p.post_rate * p.mention_fraction;

    Timestamp first_start = p.horizon;
    const auto communities = inj.communities();
    if (communities.empty()) throw InvalidArgument("CoreEmbed: no communities");
    for (CommunityId c : communities) {
        require_members(inj, c, "CoreEmbed");
        const TopicId dom = dominant_topic(inj, c);
        const double ratio = organic_repost_ratio(inj, c);

        // Hubs: highest-degree members, ties by id.
        std::vector<AccountId> hubs = inj.members(c);
        std::stable_sort(hubs.begin(), hubs.end(), [&](AccountId a, AccountId b) {
            return ctx.graph->degree(a) > ctx.graph->degree(b);
        });
        hubs.resize(std::min<std::size_t>(hubs.size(), 10));

        std::vector<AccountId> ops;
        std::vector<Timestamp> starts;
        for (std::size_t i = 0; i < pb.ops_per_community; ++i) {
            const AccountId op = inj.add_account(rng, c);
            const Timestamp start = std::uniform_int_distribution<Timestamp>(0, kDormancy)(rng);
            ops.push_back(op);
            starts.push_back(start);
            first_start = std::min(first_start, start);
            truth.operators.push_back({op, roles::kCoreEmbed, static_cast<int>(c), -1, -1});

            for (Timestamp t : poisson_times(rng, post_rate, start, p.horizon)) {
                Event e;
                e.ts = t;
                e.author = op;
                e.kind = EventKind::post;
                e.tokens = sample_document(rng, one_hot(K, dom), samplers, doc_length(rng, p));
                inj.add_event(std::move(e));
            }
            for (Timestamp t : poisson_times(rng, mention_rate, start, p.horizon)) {
                Event e;
                e.ts = t;
                e.author = op;
                e.kind = EventKind::mention;
                e.target = pick(rng, hubs);
                e.tokens = sample_document(rng, one_hot(K, dom), samplers, doc_length(rng, p));
                inj.add_event(std::move(e));
            }
        }
        amplify_posts(inj, rng, ops, starts, c, dom, pb.amplify_factor * ratio, 0, p.horizon);
    }
    truth.windows.push_back({roles::kCoreEmbed, first_start, p.horizon});
    return inj.finish(std::move(truth));
}

Injection inject_bridge(const EventLog& log, const InjectionContext& ctx, const Bridge& pb,
                        std::uint64_t seed) {
    Injector inj(log, ctx);
    GroundTruth truth;
    if (inj.communities().size() < 2) throw InvalidArgument("Bridge: fewer than 2 communities");
    if (pb.side_a == pb.side_b) throw InvalidArgument("Bridge: sides must differ");
    require_members(inj, pb.side_a, "Bridge");
    require_members(inj, pb.side_b, "Bridge");
    if (pb.num_bridges == 0) return inj.finish(std::move(truth));
    const auto& p = ctx.params;
    check_window(pb.start, pb.end, p.horizon, "Bridge");
    if (pb.cross_rate < 0.0 || pb.reaction_rate < 0.0) throw InvalidArgument("Bridge: negative rate");

    Rng rng = make_rng(seed, "inject.bridge");
    const auto K = ctx.topics.size();
    const auto samplers = make_topic_samplers(ctx.topics);
    const TopicId dom_a = dominant_topic(inj, pb.side_a);
    const TopicId dom_b = dominant_topic(inj, pb.side_b);
    TopicId shared = 0;
    if (pb.shared_topic) {
        shared = *pb.shared_topic;
        if (shared >= K) throw InvalidArgument("Bridge: shared_topic out of range");
    } else {
        while (shared < K && (shared == dom_a || shared == dom_b)) ++shared;
        if (shared == K) shared = dom_a;
    }

    auto community_mixture = [&](CommunityId c) {
        std::vector<double> alpha(K, p.doc_topic_concentration);
        alpha[c == pb.side_a ? dom_a : dom_b] += p.community_topic_boost;
        auto m = sample_dirichlet(rng, alpha);
        for (auto& x : m) x *= 0.5;
        m[shared] += 0.5;
        return m;
    };

    const double days = static_cast<double>(pb.end - pb.start) / static_cast<double>(kSecondsPerDay);
    const auto per_side = static_cast<std::size_t>(std::llround(pb.cross_rate * days));
    std::uniform_int_distribution<Timestamp> in_window(pb.start, pb.end - 1);
    std::poisson_distribution<int> reactions(pb.reaction_rate);

    for (std::size_t b = 0; b < pb.num_bridges; ++b) {
        const CommunityId home = b % 2 == 0 ? pb.side_a : pb.side_b;
        const AccountId op = inj.add_account(rng, home);
        truth.operators.push_back({op, roles::kBridge, static_cast<int>(home), -1, -1});

        // Low-key presence before the window.
        const Timestamp start = std::uniform_int_distribution<Timestamp>(0, kDormancy)(rng);
        for (Timestamp t : poisson_times(rng, 1.0, start, pb.start)) {
            Event e;
            e.ts = t;
            e.author = op;
            e.kind = EventKind::post;
            e.tokens = sample_document(rng, one_hot(K, shared), samplers, doc_length(rng, p));
            inj.add_event(std::move(e));
        }

        for (CommunityId side : {pb.side_a, pb.side_b}) {
            const CommunityId other = side == pb.side_a ? pb.side_b : pb.side_a;
            const TopicId side_topic = side == pb.side_a ? dom_a : dom_b;
            std::vector<Timestamp> times(per_side);
            for (auto& t : times) t = in_window(rng);
            std::sort(times.begin(), times.end());
            for (Timestamp t : times) {
                const AccountId m = pick(rng, inj.members(side));
                const Event* their = inj.latest_post_before(m, t);
                Event e;
                e.ts = t;
                e.author = op;
                e.kind = their ? EventKind::reply : EventKind::mention;
                e.target = their ? their->id : m;
                e.tokens = sample_document(rng, blend(K, shared, side_topic), samplers, doc_length(rng, p));
                inj.add_event(std::move(e));

                // Members of the other side pile in on the same thread.
                const int k = reactions(rng);
                for (int r = 0; r < k; ++r) {
                    const AccountId reactor = pick(rng, inj.members(other));
                    const Timestamp rt = t + exp_delay(rng, 1200.0);
                    if (rt >= p.horizon) continue;
                    Event x;
                    x.ts = rt;
                    x.author = reactor;
                    x.kind = their ? EventKind::reply : EventKind::mention;
                    x.target = their ? their->id : m;
                    x.tokens = sample_document(rng, community_mixture(other), samplers, doc_length(rng, p));
                    inj.add_event(std::move(x));
                }
            }
        }
    }
    truth.windows.push_back({roles::kBridge, pb.start, pb.end});
    return inj.finish(std::move(truth));
}

Injection inject_pump_and_pivot(const EventLog& log, const InjectionContext& ctx,
                                const PumpAndPivot& pb, std::uint64_t seed) {
    Injector inj(log, ctx);
    GroundTruth truth;
    const auto& p = ctx.params;
    const auto K = ctx.topics.size();
    if (!(0 < pb.pivot_time && pb.pivot_time < p.horizon)) {
        throw InvalidArgument("PumpAndPivot: pivot_time outside horizon");
    }
    if (!(0.0 <= pb.deletion_fraction && pb.deletion_fraction <= 1.0)) {
        throw InvalidArgument("PumpAndPivot: deletion_fraction outside [0,1]");
    }
    const auto popularity = organic_topic_counts(inj);
    const TopicId pre = pb.pre_topic.value_or(static_cast<TopicId>(
        std::max_element(popularity.begin(), popularity.end()) - popularity.begin()));
    const TopicId post = pb.post_topic.value_or(static_cast<TopicId>(
        std::min_element(popularity.begin(), popularity.end()) - popularity.begin()));
    if (pre >= K || post >= K) throw InvalidArgument("PumpAndPivot: topic out of range");
    if (pre == post) throw InvalidArgument("PumpAndPivot: pre_topic equals post_topic, no pivot exists");
    if (pb.num_ops == 0) return inj.finish(std::move(truth));

    Rng rng = make_rng(seed, "inject.pump_and_pivot");
    const auto samplers = make_topic_samplers(ctx.topics);
    const auto communities = inj.communities();
    if (communities.empty()) throw InvalidArgument("PumpAndPivot: no communities");
    std::poisson_distribution<int> gained(pb.induced_repost_rate);

    for (std::size_t i = 0; i < pb.num_ops; ++i) {
        const CommunityId c = communities[i % communities.size()];
        const AccountId op = inj.add_account(rng, c);
        truth.operators.push_back({op, roles::kPumpAndPivot, static_cast<int>(c), -1, -1});
        const Timestamp start = std::uniform_int_distribution<Timestamp>(0, kDormancy)(rng);

        // Pump: benign popular content that gathers reposts.
        std::vector<EventId> pumped;
        for (Timestamp t : poisson_times(rng, p.post_rate, start, pb.pivot_time)) {
            Event e;
            e.ts = t;
            e.author = op;
            e.kind = EventKind::post;
            e.tokens = sample_document(rng, one_hot(K, pre), samplers, doc_length(rng, p));
            const auto tokens = e.tokens;
            const EventId id = inj.add_event(std::move(e));
            pumped.push_back(id);
            const int k = pb.induced_repost_rate > 0.0 ? gained(rng) : 0;
            for (int r = 0; r < k; ++r) {
                const Timestamp rt = t + exp_delay(rng, 2.0 * kSecondsPerHour);
                if (rt >= pb.pivot_time) continue;
                Event x;
                x.ts = rt;
                x.author = pick(rng, inj.members(c));
                x.kind = EventKind::repost;
                x.target = id;
                x.tokens = tokens;
                inj.add_event(std::move(x));
            }
        }

        // Pivot: scrub most of the history and change the persona.
        Timestamp t = pb.pivot_time;
        const auto n_delete = static_cast<std::size_t>(
            std::ceil(pb.deletion_fraction * static_cast<double>(pumped.size()) - 1e-9));
        std::vector<EventId> victims = pumped;
        std::shuffle(victims.begin(), victims.end(), rng);
        victims.resize(n_delete);
        std::sort(victims.begin(), victims.end());
        for (EventId v : victims) {
            Event d;
            d.ts = t++;
            d.author = op;
            d.kind = EventKind::del;
            d.target = v;
            inj.add_event(std::move(d));
        }
        if (pb.profile_change) {
            Event pc;
            pc.ts = t++;
            pc.author = op;
            pc.kind = EventKind::profile_change;
            inj.add_event(std::move(pc));
        }

        for (Timestamp pt : poisson_times(rng, p.post_rate, pb.pivot_time + kSecondsPerHour, p.horizon)) {
            Event e;
            e.ts = pt;
            e.author = op;
            e.kind = EventKind::post;
            e.tokens = sample_document(rng, one_hot(K, post), samplers, doc_length(rng, p));
            inj.add_event(std::move(e));
        }
    }
    truth.windows.push_back({roles::kPumpAndPivot, pb.pivot_time, p.horizon});
    return inj.finish(std::move(truth));
}

Injection inject_flood(const EventLog& log, const InjectionContext& ctx, const Flood& pb,
                       std::uint64_t seed) {
    Injector inj(log, ctx);
    GroundTruth truth;
    const auto& p = ctx.params;
    check_window(pb.start, pb.end, p.horizon, "Flood");
    if (!(pb.rate_multiplier > 1.0)) throw InvalidArgument("Flood: rate_multiplier must exceed 1");
    if (pb.low_entropy_tokens == 0 || pb.low_entropy_tokens > 10 || pb.low_entropy_tokens > p.vocab_size) {
        throw InvalidArgument("Flood: low_entropy_tokens must be in 1..10");
    }
    require_members(inj, pb.target_community, "Flood");
    if (pb.num_accounts == 0) return inj.finish(std::move(truth));

    Rng rng = make_rng(seed, "inject.flood");
    // Organic event rate of the community, events per second.
    double community_events = 0.0;
    for (const auto& e : log.events) {
        if (e.author < ctx.num_organic && inj.label(e.author) == pb.target_community) community_events += 1.0;
    }
    const double rate = p.horizon > 0 ? community_events / static_cast<double>(p.horizon) : 0.0;
    const double total = pb.rate_multiplier * rate * static_cast<double>(pb.end - pb.start);
    const double per_account_per_day =
        total / static_cast<double>(pb.num_accounts) /
        (static_cast<double>(pb.end - pb.start) / static_cast<double>(kSecondsPerDay));

    // A handful of spam tokens with geometrically decaying weights.
    std::vector<TokenId> spam;
    {
        std::vector<TokenId> vocab(p.vocab_size);
        std::iota(vocab.begin(), vocab.end(), 0);
        std::shuffle(vocab.begin(), vocab.end(), rng);
        spam.assign(vocab.begin(), vocab.begin() + static_cast<std::ptrdiff_t>(pb.low_entropy_tokens));
    }
    std::vector<double> spam_w(spam.size());
    for (std::size_t i = 0; i < spam.size(); ++i) spam_w[i] = std::pow(0.3, static_cast<double>(i));
    const CategoricalSampler spam_draw(spam_w);

    for (std::size_t i = 0; i < pb.num_accounts; ++i) {
        const AccountId op = inj.add_account(rng, pb.target_community);
        truth.operators.push_back({op, roles::kFlood, static_cast<int>(pb.target_community), -1, -1});
        for (Timestamp t : poisson_times(rng, per_account_per_day, pb.start, pb.end)) {
            Event e;
            e.ts = t;
            e.author = op;
            if (uniform01(rng) < pb.mention_share) {
                e.kind = EventKind::mention;
                e.target = pick(rng, inj.members(pb.target_community));
            } else {
                e.kind = EventKind::post;
            }
            e.tokens.resize(doc_length(rng, p));
            for (auto& w : e.tokens) w = spam[spam_draw(rng)];
            inj.add_event(std::move(e));
        }
    }
    truth.windows.push_back({roles::kFlood, pb.start, pb.end});
    return inj.finish(std::move(truth));
}

namespace {

Injection inject_bolster(const EventLog& log, const InjectionContext& ctx, const Bolster& pb,
                         std::uint64_t seed) {
    Injector inj(log, ctx);
    GroundTruth truth;
    require_members(inj, pb.target_community, "Bolster");
    check_window(pb.start, pb.end, ctx.params.horizon, "Bolster");
    if (pb.num_ops == 0 || pb.amplify_factor <= 0.0) return inj.finish(std::move(truth));

    Rng rng = make_rng(seed, "inject.bolster");
    const double ratio = organic_repost_ratio(inj, pb.target_community);
    std::vector<AccountId> ops;
    std::vector<Timestamp> starts(pb.num_ops, pb.start);
    for (std::size_t i = 0; i < pb.num_ops; ++i) {
        ops.push_back(inj.add_account(rng, pb.target_community));
        truth.operators.push_back({ops.back(), roles::kBolster, static_cast<int>(pb.target_community), -1, -1});
    }
    amplify_posts(inj, rng, ops, starts, pb.target_community, std::nullopt, pb.amplify_factor * ratio,
                  pb.start, pb.end);
    truth.windows.push_back({roles::kBolster, pb.start, pb.end});
    return inj.finish(std::move(truth));
}

Injection inject_degrade(const EventLog& log, const InjectionContext& ctx, const Degrade& pb,
                         std::uint64_t seed) {
    Injector inj(log, ctx);
    GroundTruth truth;
    const auto& p = ctx.params;
    const auto K = ctx.topics.size();
    require_members(inj, pb.target_community, "Degrade");
    check_window(pb.start, pb.end, p.horizon, "Degrade");
    const auto [topic_a, topic_b] = pb.divisive_topic_pair;
    if (topic_a >= K || topic_b >= K || topic_a == topic_b) {
        throw InvalidArgument("Degrade: divisive_topic_pair must name two distinct topics");
    }
    if (pb.ops_per_faction == 0) return inj.finish(std::move(truth));

    Rng rng = make_rng(seed, "inject.degrade");
    const auto samplers = make_topic_samplers(ctx.topics);
    const CommunityId c = pb.target_community;

    // Each faction works one half of the community (alternating member ids).
    std::array<std::vector<AccountId>, 2> halves;
    const auto& members = inj.members(c);
    for (std::size_t i = 0; i < members.size(); ++i) halves[i % 2].push_back(members[i]);
    if (halves[1].empty()) halves[1] = halves[0];

    std::array<std::vector<AccountId>, 2> factions;
    for (int f = 0; f < 2; ++f) {
        for (std::size_t i = 0; i < pb.ops_per_faction; ++i) {
            const AccountId op = inj.add_account(rng, c);
            factions[f].push_back(op);
            truth.operators.push_back({op, roles::kDegrade, static_cast<int>(c), f, -1});
        }
    }
    const std::array<TopicId, 2> topic{topic_a, topic_b};
    std::uniform_int_distribution<std::size_t> chain_len(1, std::max<std::size_t>(pb.max_chain, 1));

    for (int f = 0; f < 2; ++f) {
        for (AccountId op : factions[f]) {
            for (Timestamp t : poisson_times(rng, pb.action_rate, pb.start, pb.end)) {
                Event e;
                e.ts = t;
                e.author = op;
                e.tokens = sample_document(rng, one_hot(K, topic[f]), samplers, doc_length(rng, p));
                if (uniform01(rng) < 0.5) {
                    const AccountId m = pick(rng, halves[f]);
                    const Event* their = inj.latest_post_before(m, t);
                    e.kind = their ? EventKind::reply : EventKind::mention;
                    e.target = their ? their->id : m;
                    inj.add_event(std::move(e));
                    continue;
                }
                e.kind = EventKind::post;
                EventId prev = inj.add_event(std::move(e));
                // Argument chain: the factions take turns replying.
                Timestamp ct = t;
                const auto len = chain_len(rng);
                for (std::size_t r = 0; r < len; ++r) {
                    const int side = (f + 1 + static_cast<int>(r)) % 2;
                    ct += exp_delay(rng, 600.0);
                    if (ct >= p.horizon) break;
                    Event x;
                    x.ts = ct;
                    x.author = pick(rng, factions[side]);
                    x.kind = EventKind::reply;
                    x.target = prev;
                    x.tokens = sample_document(rng, one_hot(K, topic[side]), samplers, doc_length(rng, p));
                    prev = inj.add_event(std::move(x));
                }
            }
        }
    }
    truth.windows.push_back({roles::kDegrade, pb.start, pb.end});
    return inj.finish(std::move(truth));
}

}  // namespace

Injection inject_bolster_degrade(const EventLog& log, const InjectionContext& ctx,
                                 const std::variant<Bolster, Degrade>& pb, std::uint64_t seed) {
    if (const auto* b = std::get_if<Bolster>(&pb)) return inject_bolster(log, ctx, *b, seed);
    return inject_degrade(log, ctx, std::get<Degrade>(pb), seed);
}

Injection inject(const EventLog& log, const InjectionContext& ctx, const Playbook& pb,
                 std::uint64_t seed) {
    return std::visit(
        [&](const auto& p) -> Injection {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, CoreEmbed>) return inject_core_embed(log, ctx, p, seed);
            else if constexpr (std::is_same_v<T, Bridge>) return inject_bridge(log, ctx, p, seed);
            else if constexpr (std::is_same_v<T, PumpAndPivot>) return inject_pump_and_pivot(log, ctx, p, seed);
            else if constexpr (std::is_same_v<T, Flood>) return inject_flood(log, ctx, p, seed);
            else return inject_bolster_degrade(log, ctx, p, seed);
        },
        pb);
}

void merge_truth(GroundTruth& a, const GroundTruth& b) {
    a.operators.insert(a.operators.end(), b.operators.begin(), b.operators.end());
    a.windows.insert(a.windows.end(), b.windows.begin(), b.windows.end());
    a.communities = b.communities;
    if (!b.topics.empty()) a.topics = b.topics;
}

void OperatorStackPolicy::validate() const {
    if (controller_fanout < 1) throw InvalidArgument("OperatorStackPolicy: fanout must be >= 1");
    if (timing_jitter < 0) throw InvalidArgument("OperatorStackPolicy: negative timing_jitter");
    if (sync_slot < 1) throw InvalidArgument("OperatorStackPolicy: sync_slot must be >= 1");
    if (!(0.8 <= restricted_share && restricted_share <= 1.0)) {
        throw InvalidArgument("OperatorStackPolicy: restricted_share must be in [0.8, 1]");
    }
}

StackedLog apply_operator_stack(const EventLog& log, const GroundTruth& truth,
                                const OperatorStackPolicy& policy, const ClientCatalog& catalog,
                                std::uint64_t seed) {
    policy.validate();
    catalog.validate();
    if (truth.empty()) throw InvalidArgument("apply_operator_stack: ground truth has no operators");
    if (!catalog.contains(policy.restricted_client)) {
        throw InvalidArgument("apply_operator_stack: restricted client " +
                              std::to_string(policy.restricted_client) + " not in catalog");
    }
    ClientId fallback = 0;
    for (const auto& c : catalog.clients) {
        if (c.cls == ClientClass::first_party) {
            fallback = c.id;
            break;
        }
    }

    StackedLog out{log, truth};
    std::vector<AccountId> ops;
    for (const auto& op : truth.operators) ops.push_back(op.id);
    std::sort(ops.begin(), ops.end());
    ops.erase(std::unique(ops.begin(), ops.end()), ops.end());
    std::map<AccountId, int> group;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        group[ops[i]] = static_cast<int>(i / policy.controller_fanout);
    }
    for (auto& op : out.truth.operators) op.controller = group.at(op.id);

    auto& events = out.log.events;
    std::map<AccountId, std::vector<std::size_t>> by_op;
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (group.contains(events[i].author)) by_op[events[i].author].push_back(i);
    }

    // Client mix: a fixed share of each operator's events on the restricted client.
    for (auto& [op, idx] : by_op) {
        Rng rng = make_rng(seed, "stack.clients", op);
        std::vector<std::size_t> order = idx;
        std::shuffle(order.begin(), order.end(), rng);
        const auto n_restricted = static_cast<std::size_t>(
            std::ceil(policy.restricted_share * static_cast<double>(order.size()) - 1e-9));
        for (std::size_t k = 0; k < order.size(); ++k) {
            events[order[k]].client = k < n_restricted ? policy.restricted_client : fallback;
        }
        if (!policy.geo_tags.empty()) {
            const auto& tag = policy.geo_tags[static_cast<std::size_t>(group[op]) % policy.geo_tags.size()];
            for (std::size_t i : idx) events[i].geo = tag;
        }
    }

    // Timing: every operator event fires at the end of its slot plus a per-account
    // jitter, so accounts sharing a controller act within timing_jitter of each other.
    std::unordered_map<EventId, Timestamp> new_ts;
    for (std::size_t i = 0; i < events.size(); ++i) {
        auto& e = events[i];
        Timestamp ts = e.ts;
        if (group.contains(e.author)) {
            const Timestamp slot = e.ts / policy.sync_slot;
            const auto h = derive_seed(seed, "stack.jitter",
                                       (static_cast<std::uint64_t>(e.author) << 32) ^
                                           static_cast<std::uint64_t>(slot));
            const auto jitter = static_cast<Timestamp>(h % static_cast<std::uint64_t>(policy.timing_jitter + 1));
            ts = (slot + 1) * policy.sync_slot + jitter;
        }
        if (e.target && targets_event(e.kind)) {
            auto it = new_ts.find(*e.target);
            if (it != new_ts.end()) ts = std::max(ts, it->second);
        }
        new_ts.emplace(e.id, ts);
        e.ts = ts;
    }
    sort_canonical(events);
    return out;
}

}  // namespace iolab
