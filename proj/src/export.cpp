#include "iolab/export.hpp"

#include <map>
#include <sstream>

namespace iolab {

GraphFormat parse_graph_format(const std::string& text) {
    if (text == "graphml") return GraphFormat::graphml;
    if (text == "dot") return GraphFormat::dot;
    if (text == "csv") return GraphFormat::csv;
    throw InvalidArgument("unknown format '" + text + "'");
}

std::string extension(GraphFormat f) {
    switch (f) {
        case GraphFormat::graphml: return ".graphml";
        case GraphFormat::dot: return ".dot";
        case GraphFormat::csv: return ".csv";
    }
    return "";
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string color(long label) {
    if (label < 0) return "#000000";
    return kPalette[static_cast<std::size_t>(label) % std::size(kPalette)];
}

std::string number(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

const char* kGraphmlHead =
    "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" "
    "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" "
    "xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
    "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n";

long community_of(const Partition* p, AccountId a) {
    if (p == nullptr) return -1;
    auto l = p->label_of(a);
    return l ? static_cast<long>(*l) : -1;
}

struct Placement {
    long component = -1;
    long cluster = -1;
    double suspicion = 0.0;
};

void place(const StackAnalysis* analysis, std::map<AccountId, Placement>& users,
           std::map<ClientId, Placement>& clients) {
    if (analysis == nullptr) return;
    for (std::size_t c = 0; c < analysis->clusters.size(); ++c) {
        const auto& cl = analysis->clusters[c];
        for (std::size_t i = 0; i < cl.users.size(); ++i) {
            users[cl.users[i]] = {static_cast<long>(c), cl.user_labels[i], 0.0};
        }
        for (std::size_t j = 0; j < cl.clients.size(); ++j) {
            clients[cl.clients[j]] = {static_cast<long>(c), cl.client_labels[j], 0.0};
        }
    }
    for (const auto& s : analysis->scored) {
        for (AccountId u : s.users) users[u].suspicion = s.suspicion;
    }
}

}  // namespace

std::string interaction_graphml(const InteractionGraph& g, const Partition* partition, const GroundTruth* truth) {
    std::ostringstream os;
    os << kGraphmlHead;
    os << "  <key id=\"community\" for=\"node\" attr.name=\"community\" attr.type=\"int\"/>\n";
    os << "  <key id=\"operator\" for=\"node\" attr.name=\"operator\" attr.type=\"boolean\"/>\n";
    os << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n";
    os << "  <graph id=\"interaction\" edgedefault=\"undirected\">\n";
    for (AccountId a : g.nodes) {
        os << "    <node id=\"n" << a << "\"><data key=\"community\">" << community_of(partition, a) << "</data>";
        if (truth != nullptr) os << "<data key=\"operator\">" << (truth->is_operator(a) ? "true" : "false") << "</data>";
        os << "</node>\n";
    }
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto& e = g.edges[i];
        os << "    <edge id=\"e" << i << "\" source=\"n" << e.u << "\" target=\"n" << e.v
           << "\"><data key=\"weight\">" << number(e.weight) << "</data></edge>\n";
    }
    os << "  </graph>\n</graphml>\n";
    return os.str();
}

std::string interaction_dot(const InteractionGraph& g, const Partition* partition, const GroundTruth* truth) {
    std::ostringstream os;
    os << "graph interaction {\n";
    for (AccountId a : g.nodes) {
        const long c = community_of(partition, a);
        os << "  n" << a << " [community=" << c << ", color=\"" << color(c) << "\"";
        if (truth != nullptr && truth->is_operator(a)) os << ", operator=true, shape=box";
        os << "];\n";
    }
    for (const auto& e : g.edges) {
        os << "  n" << e.u << " -- n" << e.v << " [weight=" << number(e.weight) << "];\n";
    }
    os << "}\n";
    return os.str();
}

std::string interaction_csv(const InteractionGraph& g) {
    std::ostringstream os;
    os << "u,v,weight\n";
    for (const auto& e : g.edges) os << e.u << ',' << e.v << ',' << number(e.weight) << '\n';
    return os.str();
}

std::string stack_graphml(const BipartiteStackGraph& g, const StackAnalysis* analysis, const ClientCatalog* catalog) {
    std::map<AccountId, Placement> users;
    std::map<ClientId, Placement> clients;
    place(analysis, users, clients);
    std::ostringstream os;
    os << kGraphmlHead;
    os << "  <key id=\"part\" for=\"node\" attr.name=\"bipartite\" attr.type=\"int\"/>\n";
    os << "  <key id=\"component\" for=\"node\" attr.name=\"component\" attr.type=\"int\"/>\n";
    os << "  <key id=\"cluster\" for=\"node\" attr.name=\"cluster\" attr.type=\"int\"/>\n";
    os << "  <key id=\"class\" for=\"node\" attr.name=\"client_class\" attr.type=\"string\"/>\n";
    os << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n";
    os << "  <graph id=\"stack\" edgedefault=\"undirected\">\n";
    for (AccountId u : g.users) {
        const auto p = users.contains(u) ? users[u] : Placement{};
        os << "    <node id=\"u" << u << "\"><data key=\"part\">0</data><data key=\"component\">" << p.component
           << "</data><data key=\"cluster\">" << p.cluster << "</data></node>\n";
    }
    for (ClientId c : g.clients) {
        const auto p = clients.contains(c) ? clients[c] : Placement{};
        os << "    <node id=\"c" << c << "\"><data key=\"part\">1</data><data key=\"component\">" << p.component
           << "</data><data key=\"cluster\">" << p.cluster << "</data>";
        if (catalog != nullptr && catalog->contains(c)) {
            os << "<data key=\"class\">" << to_string(catalog->at(c).cls) << "</data>";
        }
        os << "</node>\n";
    }
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto& e = g.edges[i];
        os << "    <edge id=\"e" << i << "\" source=\"u" << e.user << "\" target=\"c" << e.client
           << "\"><data key=\"weight\">" << number(e.weight) << "</data></edge>\n";
    }
    os << "  </graph>\n</graphml>\n";
    return os.str();
}

std::string stack_dot(const BipartiteStackGraph& g, const StackAnalysis* analysis) {
    std::map<AccountId, Placement> users;
    std::map<ClientId, Placement> clients;
    place(analysis, users, clients);
    std::ostringstream os;
    os << "graph stack {\n";
    for (AccountId u : g.users) {
        const auto p = users.contains(u) ? users[u] : Placement{};
        os << "  u" << u << " [bipartite=0, cluster=" << p.cluster << ", color=\"" << color(p.cluster) << "\"];\n";
    }
    for (ClientId c : g.clients) {
        const auto p = clients.contains(c) ? clients[c] : Placement{};
        os << "  c" << c << " [bipartite=1, shape=box, cluster=" << p.cluster << "];\n";
    }
    for (const auto& e : g.edges) os << "  u" << e.user << " -- c" << e.client << " [weight=" << number(e.weight) << "];\n";
    os << "}\n";
    return os.str();
}

std::string stack_clusters_csv(const StackAnalysis& analysis) {
    std::ostringstream os;
    os << "kind,node,component,cluster,suspicion\n";
    std::map<std::pair<std::size_t, int>, double> suspicion;
    for (const auto& s : analysis.scored) suspicion[{s.component, s.label}] = s.suspicion;
    for (std::size_t c = 0; c < analysis.clusters.size(); ++c) {
        const auto& cl = analysis.clusters[c];
        for (std::size_t i = 0; i < cl.users.size(); ++i) {
            os << "user," << cl.users[i] << ',' << c << ',' << cl.user_labels[i] << ','
               << number(suspicion[{c, cl.user_labels[i]}]) << '\n';
        }
        for (std::size_t j = 0; j < cl.clients.size(); ++j) {
            os << "client," << cl.clients[j] << ',' << c << ',' << cl.client_labels[j] << ",\n";
        }
    }
    return os.str();
}

}  // namespace iolab
