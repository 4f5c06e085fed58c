#pragma once

#include "iolab/ground_truth.hpp"
#include "iolab/stack.hpp"
#include "iolab/structure.hpp"

#include <filesystem>
#include <string>

namespace iolab {

enum class GraphFormat { graphml, dot, csv };

GraphFormat parse_graph_format(const std::string& text);
std::string extension(GraphFormat f);

// Node attributes: community (from the partition, -1 if absent) and
// operator (from the truth, when given).
std::string interaction_graphml(const InteractionGraph& g, const Partition* partition = nullptr,
                                const GroundTruth* truth = nullptr);
std::string interaction_dot(const InteractionGraph& g, const Partition* partition = nullptr,
                            const GroundTruth* truth = nullptr);
// Columns: u,v,weight
std::string interaction_csv(const InteractionGraph& g);

// Bipartite GraphML; user nodes "u<id>", client nodes "c<id>", with part,
// cluster and (for clients) class attributes.
std::string stack_graphml(const BipartiteStackGraph& g, const StackAnalysis* analysis = nullptr,
                          const ClientCatalog* catalog = nullptr);
std::string stack_dot(const BipartiteStackGraph& g, const StackAnalysis* analysis = nullptr);
// Columns: kind,node,component,cluster,suspicion
std::string stack_clusters_csv(const StackAnalysis& analysis);

}  // namespace iolab
