// Cross-chain co-cluster graph.
//
// Vertices are (chain, cluster) pairs; an edge connects two clusters on
// different chains that contain at least one common address.  Clusters
// that share nothing with any other chain are not materialized as
// vertices but are tallied per chain, so whole-graph accounting still
// covers every cluster.
//
// A source cluster whose edges reach two or more clusters of one target
// chain merges those target clusters from the observer's point of view;
// the impacted subgraph isolates exactly those situations.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "xchain/chain_model.hpp"
#include "xchain/clustering.hpp"

namespace xchain {

struct CoClusterVertex {
    ChainId chain;
    std::string cluster;  // canonical representative on that chain

    auto operator<=>(const CoClusterVertex&) const = default;
};

struct CoClusterEdge {
    uint32_t a = 0, b = 0;           // vertex indices, a < b
    std::vector<AddressKey> shared;  // sorted common addresses
};

struct CoClusterGraph {
    std::vector<CoClusterVertex> vertices;  // sorted by (chain, cluster)
    std::vector<CoClusterEdge> edges;       // sorted by (a, b)
    std::vector<std::vector<uint32_t>> incident;  // vertex -> edge indices
    std::map<ChainId, uint64_t> isolated_clusters;  // not sharing with anyone
    std::map<ChainId, uint64_t> cluster_totals;     // per-chain cluster counts

    size_t vertex_count() const { return vertices.size(); }
    uint64_t total_vertex_count() const;  // materialized + isolated
    size_t degree(uint32_t v) const { return incident[v].size(); }
};

CoClusterGraph build_cocluster_graph(const std::map<ChainId, const Partition*>& partitions);

// Keeps source->target edges only, then source clusters touching >= 2
// target clusters plus their target neighbours.
CoClusterGraph impacted_subgraph(const CoClusterGraph& g, const ChainId& source,
                                 const ChainId& target);

struct GraphComponent {
    std::vector<uint32_t> vertices;  // ascending
    std::vector<uint32_t> edges;     // ascending
};

// Deterministic order: components sorted by their smallest vertex.
std::vector<GraphComponent> connected_components(const CoClusterGraph& g);

enum class ComponentShape { star, non_star };

// A star has exactly one source-chain vertex and every edge incident to
// it: one entity bridging otherwise unrelated clusters.  Anything else
// (shared target clusters, several source clusters) is a non-star.
ComponentShape classify_star(const CoClusterGraph& g, const GraphComponent& comp,
                             const ChainId& source);

// Components of the full graph containing a source vertex of degree >= 2;
// unlike the pairwise subgraph this keeps multi-hop paths through other
// chains.
std::vector<GraphComponent> multi_hop_components(const CoClusterGraph& g,
                                                 const ChainId& source);

struct ComponentReport {
    bool star = false;
    std::vector<std::string> source_clusters;
    std::vector<std::string> target_clusters;
    std::vector<std::string> witness_txs;  // spends that built the source clusters
};

struct TargetImpact {
    ChainId target;
    uint64_t component_count = 0;
    uint64_t impacted_clusters = 0;  // distinct target clusters reached
    uint64_t target_cluster_total = 0;
    double impacted_fraction = 0.0;
    uint64_t stars = 0;
    uint64_t non_stars = 0;
    std::vector<ComponentReport> components;
};

struct MultiHopComponent {
    bool star = false;
    std::vector<std::string> clusters;  // "chain:representative", all chains
};

struct ImpactReport {
    ChainId source;
    std::vector<TargetImpact> targets;
    std::vector<MultiHopComponent> multi_hop;  // over source + all targets at once
};

// Per-target pairwise impact plus the multi-hop view.  An empty target
// list means every chain in `partitions` except the source.
ImpactReport impact_report(const std::map<ChainId, const Partition*>& partitions,
                           const ChainId& source, const std::vector<ChainId>& targets = {});

// CSV "src_chain,src_cluster,dst_chain,dst_cluster,shared_count".
void edges_to_csv(const CoClusterGraph& g, std::ostream& out);
void impact_to_json(const ImpactReport& r, std::ostream& out);
void graph_to_dot(const CoClusterGraph& g, std::ostream& out);

}  // namespace xchain
