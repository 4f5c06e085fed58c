#include "iolab/structure.hpp"

#include "iolab/rng.hpp"
#include "iolab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace iolab {

double InteractionGraph::total_weight() const {
    double w = 0.0;
    for (const auto& e : edges) w += e.weight;
    return w;
}

InteractionGraph build_interaction_graph(const EventLog& log, const KindFilter& kinds, TimeWindow window) {
    const EventIndex index(log);
    std::map<std::pair<AccountId, AccountId>, double> weights;
    for (const auto& e : log.events) {
        if (!kinds.contains(e.kind) || !window.contains(e.ts)) continue;
        const auto other = index.interaction_target(e);
        if (!other || *other == e.author) continue;
        const auto key = std::minmax(e.author, *other);
        weights[{key.first, key.second}] += 1.0;
    }
    InteractionGraph g;
    std::vector<AccountId> nodes;
    for (const auto& [key, w] : weights) {
        g.edges.push_back({key.first, key.second, w});
        nodes.push_back(key.first);
        nodes.push_back(key.second);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    g.nodes = std::move(nodes);
    return g;
}

std::optional<CommunityId> Partition::label_of(AccountId a) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), a);
    if (it == nodes.end() || *it != a) return std::nullopt;
    return labels[static_cast<std::size_t>(it - nodes.begin())];
}

std::size_t Partition::num_communities() const {
    if (labels.empty()) return 0;
    return static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
}

double modularity(const InteractionGraph& g, const Partition& p) {
    const double m = g.total_weight();
    if (m <= 0.0) return 0.0;
    std::map<CommunityId, double> inside, total;
    for (const auto& e : g.edges) {
        const auto cu = p.label_of(e.u);
        const auto cv = p.label_of(e.v);
        if (!cu || !cv) throw InvalidArgument("modularity: partition does not cover graph");
        if (*cu == *cv) inside[*cu] += e.weight;
        total[*cu] += e.weight;
        total[*cv] += e.weight;
    }
    double q = 0.0;
    for (const auto& [c, tot] : total) {
        const double frac = tot / (2.0 * m);
        q += inside[c] / m - frac * frac;
    }
    return q;
}

namespace {

// Graph at one Louvain level: symmetric adjacency without self entries plus a
// separate self-loop weight per node.
struct LevelGraph {
    std::vector<std::vector<std::pair<std::size_t, double>>> adj;
    std::vector<double> self_loop;

    std::size_t size() const { return adj.size(); }
    double degree(std::size_t i) const {
        double k = 2.0 * self_loop[i];
        for (const auto& [_, w] : adj[i]) k += w;
        return k;
    }
};

// One round of local moving. Returns true if any node changed community.
bool local_moving(const LevelGraph& g, std::vector<std::size_t>& community, double m, double resolution,
                  const std::vector<std::size_t>& order) {
    const auto n = g.size();
    std::vector<double> degree(n), tot(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        degree[i] = g.degree(i);
        tot[community[i]] += degree[i];
    }
    std::vector<double> link(n, 0.0);
    std::vector<std::size_t> touched;
    bool any = false;
    constexpr double kEps = 1e-12;
    for (int pass = 0; pass < 1000; ++pass) {
        bool moved = false;
        for (std::size_t i : order) {
            const std::size_t own = community[i];
            touched.clear();
            for (const auto& [j, w] : g.adj[i]) {
                const auto c = community[j];
                if (link[c] == 0.0) touched.push_back(c);
                link[c] += w;
            }
            tot[own] -= degree[i];
            const double k = degree[i];
            auto gain = [&](std::size_t c) { return link[c] - resolution * tot[c] * k / (2.0 * m); };

            const double own_gain = gain(own);
            std::size_t best = own;
            double best_gain = own_gain;
            for (std::size_t c : touched) {
                const double gc = gain(c);
                if (gc > best_gain + kEps || (std::abs(gc - best_gain) <= kEps && c < best && best != own)) {
                    best = c;
                    best_gain = gc;
                }
            }
            if (best != own && !(best_gain > own_gain + kEps)) best = own;
            tot[best] += degree[i];
            community[i] = best;
            if (best != own) moved = true;
            for (std::size_t c : touched) link[c] = 0.0;
        }
        if (!moved) break;
        any = true;
    }
    return any;
}

// Renumbers communities densely by first appearance in index order.
std::size_t renumber(std::vector<std::size_t>& community) {
    std::unordered_map<std::size_t, std::size_t> remap;
    for (auto& c : community) {
        auto [it, inserted] = remap.emplace(c, remap.size());
        c = it->second;
    }
    return remap.size();
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<std::size_t>& community, std::size_t k) {
    LevelGraph out;
    out.adj.resize(k);
    out.self_loop.assign(k, 0.0);
    std::vector<std::map<std::size_t, double>> acc(k);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto ci = community[i];
        out.self_loop[ci] += g.self_loop[i];
        for (const auto& [j, w] : g.adj[i]) {
            const auto cj = community[j];
            if (ci == cj) {
                // Each internal edge is seen from both ends.
                out.self_loop[ci] += 0.5 * w;
            } else {
                acc[ci][cj] += w;
            }
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (const auto& [d, w] : acc[c]) out.adj[c].emplace_back(d, w);
    }
    return out;
}

}  // namespace

Partition detect_communities(const InteractionGraph& g, std::uint64_t seed, double resolution) {
    if (!(resolution > 0.0)) throw InvalidArgument("detect_communities: resolution must be positive");
    if (g.empty()) throw InvalidArgument("detect_communities: empty graph");
    // Canonical node order, whatever order the caller inserted them in.
    std::vector<AccountId> nodes = g.nodes;
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    const auto n = nodes.size();
    auto index_of = [&](AccountId a) {
        return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), a) - nodes.begin());
    };

    LevelGraph level;
    level.adj.resize(n);
    level.self_loop.assign(n, 0.0);
    for (const auto& e : g.edges) {
        const auto i = index_of(e.u), j = index_of(e.v);
        level.adj[i].emplace_back(j, e.weight);
        level.adj[j].emplace_back(i, e.weight);
    }
    for (auto& nbrs : level.adj) std::sort(nbrs.begin(), nbrs.end());
    const double m = g.total_weight();

    std::vector<std::size_t> membership(n);
    std::iota(membership.begin(), membership.end(), 0);
    Rng rng = make_rng(seed, "louvain");

    for (int depth = 0; depth < 64; ++depth) {
        std::vector<std::size_t> community(level.size());
        std::iota(community.begin(), community.end(), 0);
        std::vector<std::size_t> order(level.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        if (!local_moving(level, community, m, resolution, order)) break;
        const auto k = renumber(community);
        for (auto& c : membership) c = community[c];
        if (k == level.size()) break;
        level = aggregate(level, community, k);
    }

    Partition p;
    p.nodes = nodes;
    std::unordered_map<std::size_t, CommunityId> canon;
    p.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto [it, _] = canon.emplace(membership[i], static_cast<CommunityId>(canon.size()));
        p.labels[i] = it->second;
    }
    p.modularity = modularity(g, p);
    return p;
}

std::size_t window_count(const EventLog& log, Timestamp window_len) {
    if (window_len <= 0) throw InvalidArgument("window length must be positive");
    if (log.events.empty()) return 0;
    return static_cast<std::size_t>(log_end(log) / window_len) + 1;
}

namespace {

std::vector<double> trailing(const std::vector<double>& series, std::size_t w, std::size_t count) {
    const std::size_t from = w > count ? w - count : 0;
    return {series.begin() + static_cast<std::ptrdiff_t>(from), series.begin() + static_cast<std::ptrdiff_t>(w)};
}

std::size_t window_of(Timestamp ts, Timestamp len) {
    return ts < 0 ? 0 : static_cast<std::size_t>(ts / len);
}

}  // namespace

std::vector<WindowFinding> detect_brigading(const EventLog& log, const Partition& partition,
                                            const BrigadingParams& params) {
    const auto n_windows = window_count(log, params.window_len);
    if (n_windows < 2) throw InvalidArgument("detect_brigading: horizon shorter than 2 windows");
    const EventIndex index(log);

    std::vector<double> cross(n_windows, 0.0);
    std::vector<std::map<AccountId, std::pair<double, double>>> sent(n_windows);  // (all, cross)
    std::map<AccountId, double> total_sent, replies_in;

    for (const auto& e : log.events) {
        if (!is_interaction(e.kind)) continue;
        const auto other = index.interaction_target(e);
        if (!other || *other == e.author) continue;
        const auto la = partition.label_of(e.author);
        const auto lb = partition.label_of(*other);
        if (!la || !lb) continue;
        const auto w = window_of(e.ts, params.window_len);
        const bool is_cross = *la != *lb;
        if (is_cross) cross[w] += 1.0;
        auto& s = sent[w][e.author];
        s.first += 1.0;
        if (is_cross) s.second += 1.0;
        total_sent[e.author] += 1.0;
        if (e.kind == EventKind::reply && !is_cross) replies_in[*other] += 1.0;
    }

    std::map<AccountId, double> reciprocity;
    std::vector<double> recip_values;
    for (const auto& [a, n] : total_sent) {
        const double r = replies_in[a] / n;
        reciprocity[a] = r;
        recip_values.push_back(r);
    }
    const double recip_median = median(recip_values);

    std::vector<WindowFinding> out;
    for (std::size_t w = 1; w < n_windows; ++w) {
        const auto prior = trailing(cross, w, params.baseline_windows);
        const double baseline = median(prior);
        const double threshold = params.theta_rate * std::max(baseline, 1.0);
        if (!(cross[w] >= threshold)) continue;
        WindowFinding f;
        f.window_index = w;
        f.start = static_cast<Timestamp>(w) * params.window_len;
        f.end = f.start + params.window_len;
        f.observed = cross[w];
        f.baseline = baseline;
        f.score = cross[w] / std::max(baseline, 1.0);
        for (const auto& [a, s] : sent[w]) {
            if (s.first < static_cast<double>(params.min_account_interactions)) continue;
            if (!(s.second / s.first > params.theta_discourse)) continue;
            if (!(reciprocity[a] < recip_median)) continue;
            f.accounts.push_back(a);
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<WindowFinding> detect_flood(const EventLog& log, const Partition& partition,
                                        const FloodParams& params) {
    const auto n_windows = window_count(log, params.window_len);
    if (n_windows < 2) throw InvalidArgument("detect_flood: horizon shorter than 2 windows");

    std::map<CommunityId, std::size_t> members;
    for (auto l : partition.labels) ++members[l];

    struct Cell {
        double volume = 0.0;
        std::unordered_map<TokenId, double> tokens;
        std::map<AccountId, double> by_account;
    };
    std::map<CommunityId, std::vector<Cell>> cells;
    for (const auto& [c, _] : members) cells[c].resize(n_windows);

    for (const auto& e : log.events) {
        const auto c = partition.label_of(e.author);
        if (!c) continue;
        auto& cell = cells[*c][window_of(e.ts, params.window_len)];
        cell.volume += 1.0;
        cell.by_account[e.author] += 1.0;
        for (TokenId t : e.tokens) cell.tokens[t] += 1.0;
    }

    std::vector<WindowFinding> out;
    for (const auto& [c, series] : cells) {
        std::vector<double> volume(n_windows), entropy(n_windows);
        for (std::size_t w = 0; w < n_windows; ++w) {
            volume[w] = series[w].volume;
            std::vector<double> counts;
            counts.reserve(series[w].tokens.size());
            for (const auto& [_, k] : series[w].tokens) counts.push_back(k);
            std::sort(counts.begin(), counts.end());  // order-independent summation
            entropy[w] = entropy_bits(counts);
        }
        for (std::size_t w = 1; w < n_windows; ++w) {
            const double base_vol = median(trailing(volume, w, params.baseline_windows));
            const double base_ent = median(trailing(entropy, w, params.baseline_windows));
            if (!(volume[w] >= params.theta_vol * std::max(base_vol, 1.0))) continue;
            if (!(entropy[w] < params.theta_entropy * base_ent)) continue;

            WindowFinding f;
            f.window_index = w;
            f.start = static_cast<Timestamp>(w) * params.window_len;
            f.end = f.start + params.window_len;
            f.community = c;
            f.observed = volume[w];
            f.baseline = base_vol;
            f.score = volume[w] / std::max(base_vol, 1.0);
            const double typical = base_vol / static_cast<double>(members[c]);
            const std::size_t from = w > params.baseline_windows ? w - params.baseline_windows : 0;
            for (const auto& [a, v] : series[w].by_account) {
                std::vector<double> history;
                for (std::size_t p = from; p < w; ++p) {
                    auto it = series[p].by_account.find(a);
                    history.push_back(it == series[p].by_account.end() ? 0.0 : it->second);
                }
                const double excess = v - median(history);
                if (excess > 0.5 * v && excess >= params.theta_vol * typical) f.accounts.push_back(a);
            }
            out.push_back(std::move(f));
        }
    }
    std::sort(out.begin(), out.end(), [](const WindowFinding& a, const WindowFinding& b) {
        return std::tie(a.window_index, a.community) < std::tie(b.window_index, b.community);
    });
    return out;
}

}  // namespace iolab
