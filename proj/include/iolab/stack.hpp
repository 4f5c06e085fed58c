#pragma once

#include "iolab/simgen.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace iolab {

struct StackEdge {
    AccountId user = 0;
    ClientId client = 0;
    double weight = 0.0;

    bool operator==(const StackEdge&) const = default;
};

// Weighted user-client biadjacency; edges sorted by (user, client).
struct BipartiteStackGraph {
    std::vector<AccountId> users;   // sorted
    std::vector<ClientId> clients;  // sorted
    std::vector<StackEdge> edges;

    bool empty() const { return users.empty(); }
    // Edges of one user, empty if absent.
    std::vector<StackEdge> row(AccountId user) const;
};

// w(u,c) = events of u via c / events of u.
BipartiteStackGraph build_stack_graph(const EventLog& log);

struct PruneParams {
    double ubiquity_cut = 0.5;
    double promiscuity_cut = 0.99;

    void validate() const;
};

// Drops clients used by more than ubiquity_cut of all users and users whose
// client count exceeds the promiscuity_cut quantile, then returns the
// connected components holding at least two users. Surviving edges keep their
// original weights.
std::vector<BipartiteStackGraph> prune_and_split(const BipartiteStackGraph& g, const PruneParams& params = {});

struct Svd {
    std::vector<std::vector<double>> u;  // m x r, columns orthonormal
    std::vector<double> sigma;           // r, descending
    std::vector<std::vector<double>> v;  // n x r
};

// Thin SVD by one-sided Jacobi rotations. Columns with singular value below
// tol * sigma_max are dropped. Each right singular vector's largest-magnitude
// entry is made positive.
Svd thin_svd(const std::vector<std::vector<double>>& a, double tol = 1e-10, std::size_t max_sweeps = 100);

struct KMeansResult {
    std::vector<int> labels;  // canonical: clusters numbered by first member
    std::vector<std::vector<double>> centroids;
    double inertia = 0.0;
};

// Lloyd iterations from greedy k-means++ seeding, best of several restarts.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed,
                    std::size_t restarts = 8, std::size_t max_iters = 100);

// Mean silhouette; members of singleton clusters score 0.
double silhouette(const std::vector<std::vector<double>>& points, const std::vector<int>& labels);

struct ClusterParams {
    std::size_t dim = 8;
    std::size_t k_min = 2;
    std::size_t k_max = 8;
    // Below this best silhouette everything is one cluster.
    double min_silhouette = 0.25;
    // Splits whose closest centroids are nearer than this are rejected.
    // Silhouette is scale-free, so without it noise-level differences in
    // otherwise identical usage rows would count as structure.
    double min_separation = 0.05;
};

struct StackClusters {
    std::vector<AccountId> users;
    std::vector<ClientId> clients;
    std::vector<int> user_labels;
    std::vector<int> client_labels;
    std::vector<std::vector<double>> user_centroids;
    std::vector<std::vector<double>> client_centroids;
    std::vector<std::vector<double>> user_coords;
    std::vector<std::vector<double>> client_coords;
    std::size_t rank = 0;
    std::size_t dim = 0;
    bool dim_clamped = false;
    double user_silhouette = 0.0;
    double client_silhouette = 0.0;

    std::size_t num_user_clusters() const { return user_centroids.size(); }
    std::vector<AccountId> user_cluster(int label) const;
};

StackClusters embed_and_cluster(const BipartiteStackGraph& component, const ClusterParams& params,
                                std::uint64_t seed);

struct SuspicionParams {
    double w_exclusivity = 0.4;
    double w_restricted = 0.4;
    double w_cosine = 0.2;
};

// One score per user cluster. Usage rows come from the unpruned graph.
std::vector<double> score_stack_clusters(const StackClusters& clusters, const BipartiteStackGraph& full,
                                         const ClientCatalog& catalog, const SuspicionParams& params = {});

struct ScoredCluster {
    std::size_t component = 0;
    int label = 0;
    std::vector<AccountId> users;
    double suspicion = 0.0;
};

struct StackAnalysis {
    BipartiteStackGraph graph;
    std::vector<BipartiteStackGraph> components;
    std::vector<StackClusters> clusters;  // parallel to components
    std::vector<ScoredCluster> scored;    // every user cluster of every component

    // Highest-suspicion cluster; ties go to the earlier one.
    const ScoredCluster* most_suspicious() const;
};

struct StackParams {
    PruneParams prune;
    ClusterParams cluster;
    SuspicionParams suspicion;
};

StackAnalysis analyze_stack(const EventLog& log, const ClientCatalog& catalog, const StackParams& params,
                            std::uint64_t seed);

}  // namespace iolab
