#include "iolab/harness.hpp"
#include "iolab/log_io.hpp"
#include "iolab/stats.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace py = pybind11;
using namespace iolab;

namespace {

ScenarioConfig config_from(const std::string& text) { return parse_config(text); }

std::string run(const std::string& config_json, const std::optional<std::filesystem::path>& out_dir) {
    const auto cfg = config_from(config_json);
    py::gil_scoped_release release;
    return run_scenario(cfg, out_dir).report;
}

py::dict communities(const std::vector<std::tuple<AccountId, AccountId, double>>& edges, std::uint64_t seed) {
    InteractionGraph g;
    for (const auto& [u, v, w] : edges) {
        if (u == v) throw InvalidArgument("communities: self-loop");
        g.nodes.push_back(u);
        g.nodes.push_back(v);
        g.edges.push_back({std::min(u, v), std::max(u, v), w});
    }
    std::sort(g.nodes.begin(), g.nodes.end());
    g.nodes.erase(std::unique(g.nodes.begin(), g.nodes.end()), g.nodes.end());
    std::sort(g.edges.begin(), g.edges.end(),
              [](const WeightedEdge& a, const WeightedEdge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    // Merge repeated pairs.
    std::vector<WeightedEdge> merged;
    for (const auto& e : g.edges) {
        if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v) merged.back().weight += e.weight;
        else merged.push_back(e);
    }
    g.edges = std::move(merged);
    const auto p = detect_communities(g, seed);
    py::dict out;
    out["nodes"] = p.nodes;
    out["labels"] = p.labels;
    out["modularity"] = p.modularity;
    return out;
}

py::dict stack_clusters(const std::vector<std::tuple<AccountId, ClientId, double>>& usage, std::uint64_t seed) {
    BipartiteStackGraph g;
    std::set<AccountId> users;
    std::set<ClientId> clients;
    for (const auto& [u, c, w] : usage) {
        g.edges.push_back({u, c, w});
        users.insert(u);
        clients.insert(c);
    }
    std::sort(g.edges.begin(), g.edges.end(), [](const StackEdge& a, const StackEdge& b) {
        return std::tie(a.user, a.client) < std::tie(b.user, b.client);
    });
    g.users.assign(users.begin(), users.end());
    g.clients.assign(clients.begin(), clients.end());
    const auto c = embed_and_cluster(g, ClusterParams{}, seed);
    py::dict out;
    out["users"] = c.users;
    out["clients"] = c.clients;
    out["user_labels"] = c.user_labels;
    out["client_labels"] = c.client_labels;
    out["user_coords"] = c.user_coords;
    out["client_coords"] = c.client_coords;
    return out;
}

py::dict lda(const std::vector<std::vector<TokenId>>& docs, std::size_t vocab_size, std::size_t num_topics,
             std::size_t iterations, std::uint64_t seed) {
    Corpus corpus;
    corpus.vocab_size = vocab_size;
    corpus.docs = docs;
    for (std::size_t d = 0; d < docs.size(); ++d) corpus.event_ids.push_back(d);
    LdaParams p;
    p.num_topics = num_topics;
    p.iterations = iterations;
    TopicModel m;
    {
        py::gil_scoped_release release;
        m = fit_topic_model(corpus, p, seed);
    }
    py::dict out;
    out["topic_word"] = m.topic_word;
    out["doc_topic"] = m.doc_topic;
    out["loglik"] = m.loglik;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Influence-operation simulation and detection core.";
    m.attr("__version__") = kVersion;

    // Later registrations are tried first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

    m.def("scenario_names", &bundled_scenario_names, "Names of the bundled scenarios.");
    m.def(
        "scenario_config", [](const std::string& name) { return config_to_json(bundled_scenario(name)); },
        py::arg("name"), "Canonical JSON config of a bundled scenario.");
    m.def(
        "canonical_config", [](const std::string& text) { return config_to_json(config_from(text)); },
        py::arg("config_json"), "Validate a config and render it with every field spelled out.");
    m.def(
        "config_digest", [](const std::string& text) { return config_digest(config_from(text)); },
        py::arg("config_json"));
    m.def("run", &run, py::arg("config_json"), py::arg("out_dir") = std::nullopt,
          "Simulate, inject, detect and evaluate; returns the report JSON.");
    m.def("communities", &communities, py::arg("edges"), py::arg("seed") = 0,
          "Louvain communities of a weighted edge list of (u, v, weight).");
    m.def("stack_clusters", &stack_clusters, py::arg("usage"), py::arg("seed") = 0,
          "Co-cluster users and clients from (user, client, weight) usage triples.");
    m.def("lda", &lda, py::arg("docs"), py::arg("vocab_size"), py::arg("num_topics") = 5,
          py::arg("iterations") = 500, py::arg("seed") = 0, "Collapsed Gibbs LDA on token-id documents.");
    m.def(
        "adjusted_rand_index",
        [](const std::vector<int>& a, const std::vector<int>& b) { return adjusted_rand_index(a, b); },
        py::arg("a"), py::arg("b"));
}
