#include "iolab/harness.hpp"
#include "iolab/stack.hpp"
#include "iolab/stats.hpp"

#include "test_support.hpp"

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <set>

namespace iolab {
namespace {

using testing::make_event;
using testing::make_log;

// Log in which user u posts counts[u][c] times through client c.
EventLog usage_log(const std::vector<std::map<ClientId, std::size_t>>& counts) {
    std::vector<Event> events;
    for (AccountId u = 0; u < counts.size(); ++u) {
        for (const auto& [c, n] : counts[u]) {
            for (std::size_t i = 0; i < n; ++i) {
                events.push_back(make_event(0, 0, u, EventKind::post, std::nullopt, {1}, c));
            }
        }
    }
    for (std::size_t i = 0; i < events.size(); ++i) {
        events[i].id = i;
        events[i].ts = static_cast<Timestamp>(i);
    }
    return make_log(counts.size(), events);
}

// Users 0 and 1 split evenly over clients 0 and 1, user 2 mostly does the
// same with a little of client 2, users 3 and 4 only use client 2.
EventLog fixture_log() {
    return usage_log({{{0, 10}, {1, 10}}, {{0, 10}, {1, 10}}, {{0, 9}, {1, 9}, {2, 2}}, {{2, 20}}, {{2, 20}}});
}

ClientCatalog fixture_catalog() {
    return ClientCatalog{{{0, "web", 0.5, ClientClass::first_party},
                          {1, "mobile", 0.4, ClientClass::first_party},
                          {2, "niche", 0.1, ClientClass::niche}}};
}

std::set<std::set<std::uint64_t>> groups(const std::vector<std::uint64_t>& ids, const std::vector<int>& labels) {
    std::map<int, std::set<std::uint64_t>> by;
    for (std::size_t i = 0; i < ids.size(); ++i) by[labels[i]].insert(ids[i]);
    std::set<std::set<std::uint64_t>> out;
    for (auto& [_, s] : by) out.insert(s);
    return out;
}

TEST(StackGraph, RowsAreStochastic) {
    const auto& log = testing::default_simulation(0).scenario.log;
    const auto g = build_stack_graph(log);
    std::map<AccountId, double> sums;
    for (const auto& e : g.edges) sums[e.user] += e.weight;
    ASSERT_EQ(sums.size(), g.users.size());
    for (const auto& [u, s] : sums) EXPECT_NEAR(s, 1.0, 1e-12) << "user " << u;
}

TEST(StackGraph, MatchesBruteForceCounts) {
    auto log = testing::default_simulation(0).scenario.log;
    log.events.resize(10000);
    const auto g = build_stack_graph(log);
    std::set<AccountId> users;
    std::set<ClientId> clients;
    for (const auto& e : log.events) {
        users.insert(e.author);
        clients.insert(e.client);
    }
    EXPECT_EQ(std::vector<AccountId>(users.begin(), users.end()), g.users);
    EXPECT_EQ(std::vector<ClientId>(clients.begin(), clients.end()), g.clients);
    std::size_t nonzero = 0;
    for (AccountId u : users) {
        for (ClientId c : clients) {
            double via = 0.0, total = 0.0;
            for (const auto& e : log.events) {
                if (e.author != u) continue;
                total += 1.0;
                if (e.client == c) via += 1.0;
            }
            if (via == 0.0) continue;
            ++nonzero;
            const auto row = g.row(u);
            const auto it = std::find_if(row.begin(), row.end(), [&](const StackEdge& e) { return e.client == c; });
            ASSERT_NE(it, row.end());
            EXPECT_DOUBLE_EQ(it->weight, via / total);
        }
    }
    EXPECT_EQ(nonzero, g.edges.size());
}

TEST(StackGraph, EmptyLogThrows) {
    EXPECT_THROW(build_stack_graph(EventLog{}), InvalidArgument);
}

TEST(Prune, UbiquitousClientRemovedAndBlocksSplit) {
    // Client 0 is used by everyone; clients 1 and 2 each serve half.
    std::vector<std::map<ClientId, std::size_t>> counts;
    for (int u = 0; u < 10; ++u) counts.push_back({{0, 5}, {u < 5 ? 1 : 2, 5}});
    const auto parts = prune_and_split(build_stack_graph(usage_log(counts)));
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_EQ(parts[0].users, (std::vector<AccountId>{0, 1, 2, 3, 4}));
    EXPECT_EQ(parts[1].users, (std::vector<AccountId>{5, 6, 7, 8, 9}));
    for (const auto& p : parts) {
        ASSERT_EQ(p.clients.size(), 1u);
        for (const auto& e : p.edges) EXPECT_DOUBLE_EQ(e.weight, 0.5);
    }
}

TEST(Prune, PromiscuousBridgeRemoved) {
    // 200 single-client users over clients 1..4 and one user touching all four.
    std::vector<std::map<ClientId, std::size_t>> counts;
    for (int u = 0; u < 200; ++u) counts.push_back({{static_cast<ClientId>(1 + u % 4), 3}});
    counts.push_back({{1, 1}, {2, 1}, {3, 1}, {4, 1}});
    const auto g = build_stack_graph(usage_log(counts));
    PruneParams p;
    p.ubiquity_cut = 1.0;
    const auto parts = prune_and_split(g, p);
    ASSERT_EQ(parts.size(), 4u);
    for (const auto& part : parts) {
        EXPECT_EQ(part.users.size(), 50u);
        EXPECT_FALSE(std::binary_search(part.users.begin(), part.users.end(), AccountId{200}));
    }
    p.promiscuity_cut = 1.0;
    EXPECT_EQ(prune_and_split(g, p).size(), 1u);
}

TEST(Prune, LooserCutsNeverDropMore) {
    const auto g = build_stack_graph(testing::default_simulation(0).scenario.log);
    auto kept = [&](double ubiquity, double promiscuity) {
        std::size_t users = 0;
        for (const auto& part : prune_and_split(g, {ubiquity, promiscuity})) users += part.users.size();
        return users;
    };
    std::size_t prev = 0;
    for (double u : {0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0}) {
        const auto n = kept(u, 0.99);
        EXPECT_GE(n, prev) << "ubiquity " << u;
        prev = n;
    }
    prev = 0;
    for (double q : {0.1, 0.5, 0.9, 0.99, 1.0}) {
        const auto n = kept(0.5, q);
        EXPECT_GE(n, prev) << "promiscuity " << q;
        prev = n;
    }
}

TEST(Prune, RejectsBadCuts) {
    const auto g = build_stack_graph(fixture_log());
    EXPECT_THROW(prune_and_split(g, {0.0, 0.99}), InvalidArgument);
    EXPECT_THROW(prune_and_split(g, {0.5, 1.5}), InvalidArgument);
}

TEST(Svd, MatchesEigen) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto [m, n] : {std::pair{6, 4}, std::pair{4, 6}, std::pair{30, 7}}) {
        std::vector<std::vector<double>> a(m, std::vector<double>(n));
        Eigen::MatrixXd e(m, n);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) e(i, j) = a[i][j] = unit(rng);
        }
        const auto s = thin_svd(a);
        const Eigen::JacobiSVD<Eigen::MatrixXd> ref(e, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto r = static_cast<int>(std::min(m, n));
        ASSERT_EQ(s.sigma.size(), static_cast<std::size_t>(r));
        for (int k = 0; k < r; ++k) {
            EXPECT_NEAR(s.sigma[k], ref.singularValues()(k), 1e-9);
            double du = 0.0, dv = 0.0;
            for (int i = 0; i < m; ++i) du += s.u[i][k] * ref.matrixU()(i, k);
            for (int j = 0; j < n; ++j) dv += s.v[j][k] * ref.matrixV()(j, k);
            EXPECT_NEAR(std::abs(du), 1.0, 1e-8);
            EXPECT_NEAR(std::abs(dv), 1.0, 1e-8);
            EXPECT_NEAR(du * dv, 1.0, 1e-8);  // signs agree pairwise
        }
    }
}

TEST(Svd, DropsNullDirections) {
    // Rank two: third column is the sum of the first two.
    const std::vector<std::vector<double>> a = {{1, 0, 1}, {0, 1, 1}, {1, 1, 2}, {2, 0, 2}};
    const auto s = thin_svd(a);
    EXPECT_EQ(s.sigma.size(), 2u);
}

TEST(EmbedAndCluster, FixtureGroupsOnEverySeed) {
    const auto g = build_stack_graph(fixture_log());
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto start = std::chrono::steady_clock::now();
        const auto c = embed_and_cluster(g, ClusterParams{}, seed);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        EXPECT_LT(secs, 1.0);
        std::vector<std::uint64_t> users(c.users.begin(), c.users.end()), clients(c.clients.begin(), c.clients.end());
        EXPECT_EQ(groups(users, c.user_labels), (std::set<std::set<std::uint64_t>>{{0, 1, 2}, {3, 4}})) << seed;
        EXPECT_EQ(groups(clients, c.client_labels), (std::set<std::set<std::uint64_t>>{{0, 1}, {2}})) << seed;
    }
}

TEST(EmbedAndCluster, DuplicateRowsShareCoordinates) {
    const auto c = embed_and_cluster(build_stack_graph(fixture_log()), ClusterParams{}, 0);
    for (auto [a, b] : {std::pair{0, 1}, std::pair{3, 4}}) {
        ASSERT_EQ(c.user_coords[a].size(), c.user_coords[b].size());
        for (std::size_t d = 0; d < c.user_coords[a].size(); ++d) {
            EXPECT_NEAR(c.user_coords[a][d], c.user_coords[b][d], 1e-12);
        }
    }
}

TEST(EmbedAndCluster, IdenticalUsageIsOneCluster) {
    std::vector<std::map<ClientId, std::size_t>> counts(12, {{0, 4}, {1, 4}, {2, 2}});
    const auto c = embed_and_cluster(build_stack_graph(usage_log(counts)), ClusterParams{}, 0);
    EXPECT_EQ(c.num_user_clusters(), 1u);
    for (int l : c.user_labels) EXPECT_EQ(l, 0);
}

TEST(Suspicion, RestrictedOnlyIdenticalClusterScoresOne) {
    std::vector<std::map<ClientId, std::size_t>> counts(6, {{6, 10}});
    const auto g = build_stack_graph(usage_log(counts));
    const auto c = embed_and_cluster(g, ClusterParams{}, 0);
    const auto scores = score_stack_clusters(c, g, ClientCatalog::defaults());
    ASSERT_EQ(scores.size(), 1u);
    EXPECT_DOUBLE_EQ(scores[0], 1.0);
}

TEST(Suspicion, NicheClusterOutranksMainstream) {
    const auto g = build_stack_graph(fixture_log());
    const auto c = embed_and_cluster(g, ClusterParams{}, 0);
    const auto scores = score_stack_clusters(c, g, fixture_catalog());
    ASSERT_EQ(scores.size(), 2u);
    const int niche = c.user_labels[3], mainstream = c.user_labels[0];
    EXPECT_GT(scores[niche], scores[mainstream]);
}

TEST(Suspicion, FirstPartyClusterScoresLow) {
    // Varied mixes of the two first-party clients, so rows are not all parallel.
    std::vector<std::map<ClientId, std::size_t>> counts;
    for (std::size_t u = 0; u < 8; ++u) counts.push_back({{0, 1 + u}, {1, 9 - u}});
    const auto g = build_stack_graph(usage_log(counts));
    StackClusters c;
    c.users = g.users;
    c.clients = g.clients;
    c.user_labels.assign(g.users.size(), 0);
    c.client_labels.assign(g.clients.size(), 0);
    c.user_centroids = {{0.0}};
    const auto scores = score_stack_clusters(c, g, ClientCatalog::defaults());
    ASSERT_EQ(scores.size(), 1u);
    EXPECT_LT(scores[0], 0.2);
}

TEST(AnalyzeStack, OperatorClusterIsMostSuspicious) {
    const auto cfg = bundled_scenario("stack-default");
    const auto scenario = inject_playbooks(cfg, simulate(cfg));
    const auto a = analyze_stack(scenario.log, cfg.catalog, cfg.detectors.stack, 0);
    const auto* top = a.most_suspicious();
    ASSERT_NE(top, nullptr);
    const auto ops = scenario.truth.operator_set();
    std::size_t hit = 0;
    for (AccountId u : top->users) hit += ops.count(u);
    EXPECT_GE(static_cast<double>(hit), 0.9 * static_cast<double>(ops.size()));
    EXPECT_GE(static_cast<double>(hit), 0.9 * static_cast<double>(top->users.size()));
    for (const auto& c : a.scored) {
        if (&c != top) {
            EXPECT_LT(c.suspicion, top->suspicion);
        }
    }
}

}  // namespace
}  // namespace iolab
