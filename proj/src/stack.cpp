#include "iolab/stack.hpp"

#include "iolab/rng.hpp"
#include "iolab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace iolab {

std::vector<StackEdge> BipartiteStackGraph::row(AccountId user) const {
    auto lo = std::lower_bound(edges.begin(), edges.end(), user,
                               [](const StackEdge& e, AccountId u) { return e.user < u; });
    std::vector<StackEdge> out;
    for (auto it = lo; it != edges.end() && it->user == user; ++it) out.push_back(*it);
    return out;
}

BipartiteStackGraph build_stack_graph(const EventLog& log) {
    if (log.events.empty()) throw InvalidArgument("build_stack_graph: empty log");
    std::map<AccountId, std::map<ClientId, std::size_t>> counts;
    for (const auto& e : log.events) ++counts[e.author][e.client];
    BipartiteStackGraph g;
    std::set<ClientId> clients;
    for (const auto& [u, row] : counts) {
        std::size_t total = 0;
        for (const auto& [_, n] : row) total += n;
        g.users.push_back(u);
        for (const auto& [c, n] : row) {
            g.edges.push_back({u, c, static_cast<double>(n) / static_cast<double>(total)});
            clients.insert(c);
        }
    }
    g.clients.assign(clients.begin(), clients.end());
    return g;
}

void PruneParams::validate() const {
    if (!(ubiquity_cut > 0.0 && ubiquity_cut <= 1.0) || !(promiscuity_cut > 0.0 && promiscuity_cut <= 1.0)) {
        throw InvalidArgument("prune cuts must lie in (0, 1]");
    }
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

std::vector<BipartiteStackGraph> prune_and_split(const BipartiteStackGraph& g, const PruneParams& params) {
    params.validate();
    if (g.empty()) return {};
    const double n_users = static_cast<double>(g.users.size());

    std::map<ClientId, double> client_users;
    std::map<AccountId, double> user_degree;
    for (const auto& e : g.edges) {
        client_users[e.client] += 1.0;
        user_degree[e.user] += 1.0;
    }
    std::set<ClientId> dropped_clients;
    for (const auto& [c, n] : client_users) {
        if (n / n_users > params.ubiquity_cut) dropped_clients.insert(c);
    }
    std::vector<double> degrees;
    for (const auto& [_, d] : user_degree) degrees.push_back(d);
    const double max_degree = quantile(degrees, params.promiscuity_cut);

    std::vector<StackEdge> kept;
    for (const auto& e : g.edges) {
        if (dropped_clients.contains(e.client) || user_degree[e.user] > max_degree) continue;
        kept.push_back(e);
    }

    // Users occupy [0, U), clients [U, U + C) in the union-find.
    const std::size_t U = g.users.size();
    auto user_index = [&](AccountId u) {
        return static_cast<std::size_t>(std::lower_bound(g.users.begin(), g.users.end(), u) - g.users.begin());
    };
    auto client_index = [&](ClientId c) {
        return U + static_cast<std::size_t>(std::lower_bound(g.clients.begin(), g.clients.end(), c) - g.clients.begin());
    };
    UnionFind uf(U + g.clients.size());
    for (const auto& e : kept) uf.unite(user_index(e.user), client_index(e.client));

    std::map<std::size_t, BipartiteStackGraph> by_root;
    for (const auto& e : kept) by_root[uf.find(user_index(e.user))].edges.push_back(e);

    std::vector<BipartiteStackGraph> out;
    for (auto& [_, comp] : by_root) {
        std::set<AccountId> users;
        std::set<ClientId> clients;
        for (const auto& e : comp.edges) {
            users.insert(e.user);
            clients.insert(e.client);
        }
        if (users.size() < 2) continue;
        comp.users.assign(users.begin(), users.end());
        comp.clients.assign(clients.begin(), clients.end());
        out.push_back(std::move(comp));
    }
    // Roots are the smallest index, so components already come in order of
    // their smallest user id.
    return out;
}

Svd thin_svd(const std::vector<std::vector<double>>& a, double tol, std::size_t max_sweeps) {
    const std::size_t m = a.size();
    const std::size_t n = m == 0 ? 0 : a[0].size();
    // Work column-major.
    std::vector<std::vector<double>> w(n, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i) {
        if (a[i].size() != n) throw InvalidArgument("thin_svd: ragged matrix");
        for (std::size_t j = 0; j < n; ++j) w[j][i] = a[i][j];
    }
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;  // v[col][row]

    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += w[p][i] * w[p][i];
                    beta += w[q][i] * w[q][i];
                    gamma += w[p][i] * w[q][i];
                }
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta) || gamma == 0.0) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double x = w[p][i], y = w[q][i];
                    w[p][i] = c * x - s * y;
                    w[q][i] = s * x + c * y;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double x = v[p][i], y = v[q][i];
                    v[p][i] = c * x - s * y;
                    v[q][i] = s * x + c * y;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> norms(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (double x : w[j]) s += x * x;
        norms[j] = std::sqrt(s);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });
    const double top = n == 0 ? 0.0 : norms[order[0]];

    Svd out;
    out.u.assign(m, {});
    out.v.assign(n, {});
    for (std::size_t j : order) {
        const double sigma = norms[j];
        if (sigma <= 0.0 || sigma <= tol * top) break;
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (std::abs(v[j][i]) > std::abs(v[j][arg]) + 1e-12) arg = i;
        }
        const double sign = v[j][arg] < 0.0 ? -1.0 : 1.0;
        out.sigma.push_back(sigma);
        for (std::size_t i = 0; i < m; ++i) out.u[i].push_back(sign * w[j][i] / sigma);
        for (std::size_t i = 0; i < n; ++i) out.v[i].push_back(sign * v[j][i]);
    }
    return out;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

std::size_t nearest(const std::vector<double>& p, const std::vector<std::vector<double>>& centroids) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = sq_dist(p, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

std::vector<std::vector<double>> greedy_seeding(const std::vector<std::vector<double>>& pts, std::size_t k, Rng& rng) {
    const std::size_t n = pts.size();
    std::vector<std::vector<double>> centers;
    centers.push_back(pts[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(pts[i], centers[0]);
    const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
    while (centers.size() < k) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t best_candidate = 0;
        double best_potential = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < trials; ++t) {
            const std::size_t cand = total > 0.0 ? sample_index(rng, d2)
                                                 : std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
            double potential = 0.0;
            for (std::size_t i = 0; i < n; ++i) potential += std::min(d2[i], sq_dist(pts[i], pts[cand]));
            if (potential < best_potential) {
                best_potential = potential;
                best_candidate = cand;
            }
        }
        centers.push_back(pts[best_candidate]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(pts[i], centers.back()));
    }
    return centers;
}

// Relabels clusters by first member and drops empty ones.
void canonicalize(KMeansResult& r) {
    std::map<int, int> remap;
    for (int& l : r.labels) {
        auto [it, _] = remap.emplace(l, static_cast<int>(remap.size()));
        l = it->second;
    }
    std::vector<std::vector<double>> centroids(remap.size());
    for (const auto& [old, now] : remap) centroids[static_cast<std::size_t>(now)] = r.centroids[static_cast<std::size_t>(old)];
    r.centroids = std::move(centroids);
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed,
                    std::size_t restarts, std::size_t max_iters) {
    if (points.empty() || k == 0 || k > points.size()) throw InvalidArgument("kmeans: need 1 <= k <= n");
    const std::size_t n = points.size();
    const std::size_t dim = points[0].size();
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
        Rng rng = make_rng(seed, "kmeans", r);
        auto centroids = greedy_seeding(points, k, rng);
        std::vector<int> labels(n, -1);
        for (std::size_t it = 0; it < max_iters; ++it) {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                const int l = static_cast<int>(nearest(points[i], centroids));
                if (l != labels[i]) {
                    labels[i] = l;
                    changed = true;
                }
            }
            if (!changed) break;
            std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
            std::vector<double> counts(k, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const auto l = static_cast<std::size_t>(labels[i]);
                counts[l] += 1.0;
                for (std::size_t j = 0; j < dim; ++j) sums[l][j] += points[i][j];
            }
            for (std::size_t c = 0; c < k; ++c) {
                if (counts[c] == 0.0) continue;  // empty cluster keeps its centroid
                for (std::size_t j = 0; j < dim; ++j) centroids[c][j] = sums[c][j] / counts[c];
            }
        }
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) inertia += sq_dist(points[i], centroids[static_cast<std::size_t>(labels[i])]);
        if (inertia < best.inertia - 1e-12) {
            best.labels = labels;
            best.centroids = centroids;
            best.inertia = inertia;
        }
    }
    canonicalize(best);
    return best;
}

double silhouette(const std::vector<std::vector<double>>& points, const std::vector<int>& labels) {
    const std::size_t n = points.size();
    if (n == 0) return 0.0;
    const auto k = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
    std::vector<double> size(k, 0.0);
    for (int l : labels) size[static_cast<std::size_t>(l)] += 1.0;
    double total = 0.0;
    std::vector<double> sum(k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(labels[i]);
        if (size[own] <= 1.0) continue;
        std::fill(sum.begin(), sum.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) sum[static_cast<std::size_t>(labels[j])] += std::sqrt(sq_dist(points[i], points[j]));
        }
        const double a = sum[own] / (size[own] - 1.0);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c != own && size[c] > 0.0) b = std::min(b, sum[c] / size[c]);
        }
        if (!std::isfinite(b)) continue;
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

namespace {

std::size_t distinct_points(const std::vector<std::vector<double>>& pts) {
    std::set<std::vector<long long>> seen;
    for (const auto& p : pts) {
        std::vector<long long> key;
        for (double x : p) key.push_back(std::llround(x * 1e9));
        seen.insert(std::move(key));
    }
    return seen.size();
}

struct Choice {
    std::vector<int> labels;
    std::vector<std::vector<double>> centroids;
    double silhouette = 0.0;
};

Choice choose_clusters(const std::vector<std::vector<double>>& pts, const ClusterParams& params, std::uint64_t seed) {
    const std::size_t n = pts.size();
    Choice best;
    best.silhouette = -std::numeric_limits<double>::infinity();
    const std::size_t k_hi = std::min({params.k_max, distinct_points(pts), n > 0 ? n - 1 : 0});
    for (std::size_t k = std::max<std::size_t>(params.k_min, 2); k <= k_hi; ++k) {
        auto km = kmeans(pts, k, derive_seed(seed, "k", k));
        if (km.centroids.size() < 2) continue;
        double closest = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < km.centroids.size(); ++a) {
            for (std::size_t b = a + 1; b < km.centroids.size(); ++b) {
                closest = std::min(closest, std::sqrt(sq_dist(km.centroids[a], km.centroids[b])));
            }
        }
        if (closest < params.min_separation) continue;
        const double s = silhouette(pts, km.labels);
        if (s > best.silhouette + 1e-12) {
            best.labels = std::move(km.labels);
            best.centroids = std::move(km.centroids);
            best.silhouette = s;
        }
    }
    if (best.labels.empty() || best.silhouette < params.min_silhouette) {
        const double s = best.labels.empty() ? 0.0 : best.silhouette;
        best.labels.assign(n, 0);
        std::vector<double> c(n > 0 ? pts[0].size() : 0, 0.0);
        for (const auto& p : pts) {
            for (std::size_t j = 0; j < c.size(); ++j) c[j] += p[j] / static_cast<double>(n);
        }
        best.centroids = {c};
        best.silhouette = s;
    }
    return best;
}

}  // namespace

std::vector<AccountId> StackClusters::user_cluster(int label) const {
    std::vector<AccountId> out;
    for (std::size_t i = 0; i < users.size(); ++i) {
        if (user_labels[i] == label) out.push_back(users[i]);
    }
    return out;
}

StackClusters embed_and_cluster(const BipartiteStackGraph& component, const ClusterParams& params,
                                std::uint64_t seed) {
    if (component.users.size() < 2) throw InvalidArgument("embed_and_cluster: need at least two users");
    if (params.dim < 1) throw InvalidArgument("embed_and_cluster: dim must be >= 1");
    StackClusters out;
    out.users = component.users;
    out.clients = component.clients;
    const std::size_t m = out.users.size(), n = out.clients.size();

    std::vector<std::vector<double>> a(m, std::vector<double>(n, 0.0));
    for (const auto& e : component.edges) {
        const auto i = static_cast<std::size_t>(std::lower_bound(out.users.begin(), out.users.end(), e.user) - out.users.begin());
        const auto j = static_cast<std::size_t>(std::lower_bound(out.clients.begin(), out.clients.end(), e.client) - out.clients.begin());
        a[i][j] = e.weight;
    }
    const Svd svd = thin_svd(a);
    out.rank = svd.sigma.size();
    out.dim = std::min(params.dim, out.rank);
    out.dim_clamped = params.dim > out.rank;

    out.user_coords.assign(m, std::vector<double>(out.dim));
    out.client_coords.assign(n, std::vector<double>(out.dim));
    for (std::size_t r = 0; r < out.dim; ++r) {
        for (std::size_t i = 0; i < m; ++i) out.user_coords[i][r] = svd.u[i][r] * svd.sigma[r];
        for (std::size_t j = 0; j < n; ++j) out.client_coords[j][r] = svd.v[j][r] * svd.sigma[r];
    }

    auto users = choose_clusters(out.user_coords, params, derive_seed(seed, "users"));
    out.user_labels = std::move(users.labels);
    out.user_centroids = std::move(users.centroids);
    out.user_silhouette = users.silhouette;
    auto clients = choose_clusters(out.client_coords, params, derive_seed(seed, "clients"));
    out.client_labels = std::move(clients.labels);
    out.client_centroids = std::move(clients.centroids);
    out.client_silhouette = clients.silhouette;
    return out;
}

std::vector<double> score_stack_clusters(const StackClusters& clusters, const BipartiteStackGraph& full,
                                         const ClientCatalog& catalog, const SuspicionParams& params) {
    const auto& cols = full.clients;
    auto dense_row = [&](AccountId u) {
        std::vector<double> row(cols.size(), 0.0);
        for (const auto& e : full.row(u)) {
            row[static_cast<std::size_t>(std::lower_bound(cols.begin(), cols.end(), e.client) - cols.begin())] = e.weight;
        }
        return row;
    };
    auto cls_of = [&](ClientId c) {
        return catalog.contains(c) ? catalog.at(c).cls : ClientClass::first_party;
    };

    std::vector<double> scores;
    for (std::size_t label = 0; label < clusters.num_user_clusters(); ++label) {
        const auto members = clusters.user_cluster(static_cast<int>(label));
        std::vector<std::vector<double>> rows;
        double exclusivity = 0.0;
        bool restricted = false;
        for (AccountId u : members) {
            rows.push_back(dense_row(u));
            for (const auto& e : full.row(u)) {
                const auto cls = cls_of(e.client);
                if (cls == ClientClass::niche || cls == ClientClass::restricted) exclusivity += e.weight;
                if (cls == ClientClass::restricted) restricted = true;
            }
        }
        exclusivity /= static_cast<double>(members.size());
        double cosine = 1.0;
        if (rows.size() > 1) {
            double sum = 0.0, pairs = 0.0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                for (std::size_t j = i + 1; j < rows.size(); ++j) {
                    sum += cosine_similarity(rows[i], rows[j]);
                    pairs += 1.0;
                }
            }
            cosine = sum / pairs;
        }
        const double s = params.w_exclusivity * exclusivity + params.w_restricted * (restricted ? 1.0 : 0.0) +
                         params.w_cosine * cosine;
        scores.push_back(std::clamp(s, 0.0, 1.0));
    }
    return scores;
}

const ScoredCluster* StackAnalysis::most_suspicious() const {
    const ScoredCluster* best = nullptr;
    for (const auto& c : scored) {
        if (best == nullptr || c.suspicion > best->suspicion) best = &c;
    }
    return best;
}

StackAnalysis analyze_stack(const EventLog& log, const ClientCatalog& catalog, const StackParams& params,
                            std::uint64_t seed) {
    StackAnalysis out;
    out.graph = build_stack_graph(log);
    out.components = prune_and_split(out.graph, params.prune);
    for (std::size_t i = 0; i < out.components.size(); ++i) {
        out.clusters.push_back(embed_and_cluster(out.components[i], params.cluster, derive_seed(seed, "stack", i)));
        const auto scores = score_stack_clusters(out.clusters.back(), out.graph, catalog, params.suspicion);
        for (std::size_t l = 0; l < scores.size(); ++l) {
            out.scored.push_back({i, static_cast<int>(l), out.clusters.back().user_cluster(static_cast<int>(l)), scores[l]});
        }
    }
    return out;
}

}  // namespace iolab
