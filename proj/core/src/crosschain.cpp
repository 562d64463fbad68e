#include "xchain/crosschain.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace xchain {

namespace {

using nlohmann::ordered_json;

void build_incident(CoClusterGraph& g) {
    g.incident.assign(g.vertices.size(), {});
    for (uint32_t e = 0; e < g.edges.size(); ++e) {
        g.incident[g.edges[e].a].push_back(e);
        g.incident[g.edges[e].b].push_back(e);
    }
}

}  // namespace

uint64_t CoClusterGraph::total_vertex_count() const {
    uint64_t total = vertices.size();
    for (const auto& [chain, count] : isolated_clusters)
        total += count;
    return total;
}

CoClusterGraph build_cocluster_graph(const std::map<ChainId, const Partition*>& partitions) {
    if (partitions.empty())
        throw std::invalid_argument("co-cluster graph needs at least one chain");
    for (const auto& [chain, p] : partitions)
        if (!p)
            throw std::invalid_argument("null partition for chain: " + chain);

    std::vector<ChainId> chains;
    std::vector<const Partition*> parts;
    for (const auto& [chain, p] : partitions) {
        chains.push_back(chain);
        parts.push_back(p);
    }

    // Accumulate vertices/edges with provisional ids keyed by
    // (chain index, cluster id); addresses are compared across chains by
    // looking the smaller universe up in the larger.
    auto vkey = [](uint32_t chain_idx, uint32_t cid) {
        return (uint64_t{chain_idx} << 32) | cid;
    };
    std::unordered_map<uint64_t, uint32_t> vid_of;
    std::vector<std::pair<uint32_t, uint32_t>> vpairs;  // vid -> (chain_idx, cid)
    auto get_vid = [&](uint32_t chain_idx, uint32_t cid) {
        auto [it, fresh] = vid_of.try_emplace(vkey(chain_idx, cid),
                                              static_cast<uint32_t>(vpairs.size()));
        if (fresh)
            vpairs.emplace_back(chain_idx, cid);
        return it->second;
    };
    std::unordered_map<uint64_t, uint32_t> eid_of;
    std::vector<std::pair<uint32_t, uint32_t>> epairs;          // eid -> (vid, vid)
    std::vector<std::vector<std::string_view>> eshared;

    for (size_t i = 0; i < parts.size(); ++i) {
        for (size_t j = i + 1; j < parts.size(); ++j) {
            const Partition* small = parts[i];
            const Partition* large = parts[j];
            uint32_t small_idx = static_cast<uint32_t>(i);
            uint32_t large_idx = static_cast<uint32_t>(j);
            if (small->universe_size() > large->universe_size()) {
                std::swap(small, large);
                std::swap(small_idx, large_idx);
            }
            for (AddrId id = 0; id < small->universe_size(); ++id) {
                const std::string& key = small->key_of(id);
                auto other = large->id_of(key);
                if (!other)
                    continue;
                uint32_t va = get_vid(small_idx, small->cluster_of(id));
                uint32_t vb = get_vid(large_idx, large->cluster_of(*other));
                uint64_t ekey = (uint64_t{std::min(va, vb)} << 32) | std::max(va, vb);
                auto [it, fresh] = eid_of.try_emplace(ekey, static_cast<uint32_t>(epairs.size()));
                if (fresh) {
                    epairs.emplace_back(std::min(va, vb), std::max(va, vb));
                    eshared.emplace_back();
                }
                eshared[it->second].push_back(key);
            }
        }
    }

    CoClusterGraph g;
    g.vertices.reserve(vpairs.size());
    for (const auto& [chain_idx, cid] : vpairs)
        g.vertices.push_back({chains[chain_idx], std::string(parts[chain_idx]->cluster_rep(cid))});

    // Re-number vertices into (chain, cluster) order.
    std::vector<uint32_t> order(g.vertices.size());
    for (uint32_t v = 0; v < order.size(); ++v)
        order[v] = v;
    std::sort(order.begin(), order.end(),
              [&](uint32_t a, uint32_t b) { return g.vertices[a] < g.vertices[b]; });
    std::vector<uint32_t> new_id(order.size());
    std::vector<CoClusterVertex> sorted;
    sorted.reserve(order.size());
    for (uint32_t rank = 0; rank < order.size(); ++rank) {
        new_id[order[rank]] = rank;
        sorted.push_back(std::move(g.vertices[order[rank]]));
    }
    g.vertices = std::move(sorted);

    g.edges.reserve(epairs.size());
    for (size_t e = 0; e < epairs.size(); ++e) {
        CoClusterEdge edge;
        edge.a = new_id[epairs[e].first];
        edge.b = new_id[epairs[e].second];
        if (edge.a > edge.b)
            std::swap(edge.a, edge.b);
        edge.shared.assign(eshared[e].begin(), eshared[e].end());
        std::sort(edge.shared.begin(), edge.shared.end());
        g.edges.push_back(std::move(edge));
    }
    std::sort(g.edges.begin(), g.edges.end(), [](const CoClusterEdge& x, const CoClusterEdge& y) {
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });
    build_incident(g);

    // Whole-graph accounting: every cluster is either a vertex or isolated.
    std::vector<uint64_t> sharing(chains.size(), 0);
    for (const auto& [chain_idx, cid] : vpairs)
        ++sharing[chain_idx];
    for (size_t i = 0; i < chains.size(); ++i) {
        g.cluster_totals[chains[i]] = parts[i]->cluster_count();
        g.isolated_clusters[chains[i]] = parts[i]->cluster_count() - sharing[i];
    }
    return g;
}

CoClusterGraph impacted_subgraph(const CoClusterGraph& g, const ChainId& source,
                                 const ChainId& target) {
    if (source == target)
        throw std::invalid_argument("impacted subgraph needs two distinct chains");

    // Count, per source vertex, the target clusters it reaches (edges are
    // unique per cluster pair, so incident edges count distinct clusters).
    std::vector<uint32_t> target_degree(g.vertices.size(), 0);
    for (const CoClusterEdge& e : g.edges) {
        const ChainId& ca = g.vertices[e.a].chain;
        const ChainId& cb = g.vertices[e.b].chain;
        if (ca == source && cb == target)
            ++target_degree[e.a];
        else if (cb == source && ca == target)
            ++target_degree[e.b];
    }

    std::vector<bool> keep_vertex(g.vertices.size(), false);
    std::vector<uint32_t> kept_edges;
    for (uint32_t ei = 0; ei < g.edges.size(); ++ei) {
        const CoClusterEdge& e = g.edges[ei];
        const ChainId& ca = g.vertices[e.a].chain;
        const ChainId& cb = g.vertices[e.b].chain;
        uint32_t src = 0;
        if (ca == source && cb == target)
            src = e.a;
        else if (cb == source && ca == target)
            src = e.b;
        else
            continue;
        if (target_degree[src] >= 2) {
            keep_vertex[e.a] = keep_vertex[e.b] = true;
            kept_edges.push_back(ei);
        }
    }

    CoClusterGraph sub;
    std::vector<uint32_t> new_id(g.vertices.size(), UINT32_MAX);
    for (uint32_t v = 0; v < g.vertices.size(); ++v)
        if (keep_vertex[v]) {
            new_id[v] = static_cast<uint32_t>(sub.vertices.size());
            sub.vertices.push_back(g.vertices[v]);
        }
    for (uint32_t ei : kept_edges) {
        CoClusterEdge e = g.edges[ei];
        e.a = new_id[e.a];
        e.b = new_id[e.b];
        sub.edges.push_back(std::move(e));
    }
    build_incident(sub);
    sub.cluster_totals = g.cluster_totals;  // context for fractions; nothing isolated here
    return sub;
}

std::vector<GraphComponent> connected_components(const CoClusterGraph& g) {
    std::vector<GraphComponent> comps;
    std::vector<bool> seen(g.vertices.size(), false);
    std::vector<uint32_t> stack;
    for (uint32_t start = 0; start < g.vertices.size(); ++start) {
        if (seen[start])
            continue;
        GraphComponent comp;
        seen[start] = true;
        stack.push_back(start);
        while (!stack.empty()) {
            uint32_t v = stack.back();
            stack.pop_back();
            comp.vertices.push_back(v);
            for (uint32_t ei : g.incident[v]) {
                comp.edges.push_back(ei);
                const CoClusterEdge& e = g.edges[ei];
                uint32_t w = e.a == v ? e.b : e.a;
                if (!seen[w]) {
                    seen[w] = true;
                    stack.push_back(w);
                }
            }
        }
        std::sort(comp.vertices.begin(), comp.vertices.end());
        std::sort(comp.edges.begin(), comp.edges.end());
        comp.edges.erase(std::unique(comp.edges.begin(), comp.edges.end()), comp.edges.end());
        comps.push_back(std::move(comp));
    }
    return comps;
}

ComponentShape classify_star(const CoClusterGraph& g, const GraphComponent& comp,
                             const ChainId& source) {
    uint32_t hub = UINT32_MAX;
    size_t source_vertices = 0;
    for (uint32_t v : comp.vertices)
        if (g.vertices[v].chain == source) {
            ++source_vertices;
            hub = v;
        }
    if (source_vertices != 1)
        return ComponentShape::non_star;
    for (uint32_t ei : comp.edges) {
        const CoClusterEdge& e = g.edges[ei];
        if (e.a != hub && e.b != hub)
            return ComponentShape::non_star;
    }
    return ComponentShape::star;
}

std::vector<GraphComponent> multi_hop_components(const CoClusterGraph& g,
                                                 const ChainId& source) {
    std::vector<GraphComponent> all = connected_components(g);
    std::vector<GraphComponent> kept;
    for (GraphComponent& comp : all) {
        bool impacting = false;
        for (uint32_t v : comp.vertices)
            if (g.vertices[v].chain == source && g.degree(v) >= 2) {
                impacting = true;
                break;
            }
        if (impacting)
            kept.push_back(std::move(comp));
    }
    return kept;
}

ImpactReport impact_report(const std::map<ChainId, const Partition*>& partitions,
                           const ChainId& source, const std::vector<ChainId>& targets) {
    auto src_it = partitions.find(source);
    if (src_it == partitions.end())
        throw std::invalid_argument("source chain has no partition: " + source);
    const Partition& src_part = *src_it->second;

    std::vector<ChainId> effective = targets;
    if (effective.empty()) {
        for (const auto& [chain, p] : partitions)
            if (chain != source)
                effective.push_back(chain);
    }
    if (effective.empty())
        throw std::invalid_argument("impact report needs at least one target chain");

    ImpactReport report;
    report.source = source;

    for (const ChainId& target : effective) {
        auto tgt_it = partitions.find(target);
        if (tgt_it == partitions.end())
            throw std::invalid_argument("target chain has no partition: " + target);
        if (target == source)
            throw std::invalid_argument("target equals source: " + target);

        std::map<ChainId, const Partition*> pair_parts{{source, &src_part},
                                                       {target, tgt_it->second}};
        CoClusterGraph pair_graph = build_cocluster_graph(pair_parts);
        CoClusterGraph sub = impacted_subgraph(pair_graph, source, target);
        std::vector<GraphComponent> comps = connected_components(sub);

        TargetImpact ti;
        ti.target = target;
        ti.component_count = comps.size();
        ti.target_cluster_total = tgt_it->second->cluster_count();
        for (const CoClusterVertex& v : sub.vertices)
            if (v.chain == target)
                ++ti.impacted_clusters;
        ti.impacted_fraction =
            ti.target_cluster_total == 0
                ? 0.0
                : static_cast<double>(ti.impacted_clusters) / ti.target_cluster_total;

        for (const GraphComponent& comp : comps) {
            ComponentReport cr;
            cr.star = classify_star(sub, comp, source) == ComponentShape::star;
            for (uint32_t v : comp.vertices) {
                const CoClusterVertex& vert = sub.vertices[v];
                if (vert.chain == source) {
                    cr.source_clusters.push_back(vert.cluster);
                    for (std::string_view tx :
                         src_part.merge_witnesses(src_part.cluster_id(vert.cluster)))
                        cr.witness_txs.emplace_back(tx);
                } else {
                    cr.target_clusters.push_back(vert.cluster);
                }
            }
            if (cr.star)
                ++ti.stars;
            else
                ++ti.non_stars;
            ti.components.push_back(std::move(cr));
        }
        report.targets.push_back(std::move(ti));
    }

    // Multi-hop view over every chain at once.
    std::map<ChainId, const Partition*> all_parts{{source, &src_part}};
    for (const ChainId& target : effective)
        all_parts[target] = partitions.at(target);
    CoClusterGraph full = build_cocluster_graph(all_parts);
    for (const GraphComponent& comp : multi_hop_components(full, source)) {
        MultiHopComponent mc;
        mc.star = classify_star(full, comp, source) == ComponentShape::star;
        for (uint32_t v : comp.vertices)
            mc.clusters.push_back(full.vertices[v].chain + ":" + full.vertices[v].cluster);
        report.multi_hop.push_back(std::move(mc));
    }
    return report;
}

void edges_to_csv(const CoClusterGraph& g, std::ostream& out) {
    out << "src_chain,src_cluster,dst_chain,dst_cluster,shared_count\n";
    for (const CoClusterEdge& e : g.edges) {
        const CoClusterVertex& a = g.vertices[e.a];
        const CoClusterVertex& b = g.vertices[e.b];
        out << a.chain << ',' << a.cluster << ',' << b.chain << ',' << b.cluster << ','
            << e.shared.size() << '\n';
    }
}

void impact_to_json(const ImpactReport& r, std::ostream& out) {
    ordered_json j;
    j["source"] = r.source;
    j["targets"] = ordered_json::array();
    for (const TargetImpact& ti : r.targets) {
        ordered_json jt;
        jt["target"] = ti.target;
        jt["component_count"] = ti.component_count;
        jt["impacted_clusters"] = ti.impacted_clusters;
        jt["target_cluster_total"] = ti.target_cluster_total;
        jt["impacted_fraction"] = ti.impacted_fraction;
        jt["stars"] = ti.stars;
        jt["non_stars"] = ti.non_stars;
        jt["components"] = ordered_json::array();
        for (const ComponentReport& cr : ti.components) {
            ordered_json jc;
            jc["star"] = cr.star;
            jc["source_clusters"] = cr.source_clusters;
            jc["target_clusters"] = cr.target_clusters;
            jc["witness_txs"] = cr.witness_txs;
            jt["components"].push_back(std::move(jc));
        }
        j["targets"].push_back(std::move(jt));
    }
    j["multi_hop"] = ordered_json::array();
    for (const MultiHopComponent& mc : r.multi_hop) {
        ordered_json jm;
        jm["star"] = mc.star;
        jm["clusters"] = mc.clusters;
        j["multi_hop"].push_back(std::move(jm));
    }
    out << j.dump(2) << '\n';
}

void graph_to_dot(const CoClusterGraph& g, std::ostream& out) {
    out << "graph cocluster {\n";
    for (uint32_t v = 0; v < g.vertices.size(); ++v)
        out << "  v" << v << " [label=\"" << g.vertices[v].chain << ":" << g.vertices[v].cluster
            << "\"];\n";
    for (const CoClusterEdge& e : g.edges)
        out << "  v" << e.a << " -- v" << e.b << " [label=\"" << e.shared.size() << "\"];\n";
    out << "}\n";
}

}  // namespace xchain
