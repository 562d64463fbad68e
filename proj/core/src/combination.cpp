#include "xchain/combination.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace xchain {

CombinationOrdering combine(const std::vector<const ChainSnapshot*>& snapshots,
                            std::string name) {
    if (snapshots.empty())
        throw std::invalid_argument("combination needs at least one chain");

    CombinationOrdering combo;
    combo.name = std::move(name);
    size_t total = 0;
    for (const ChainSnapshot* snap : snapshots) {
        for (const ChainId& prev : combo.members)
            if (prev == snap->chain)
                throw std::invalid_argument("duplicate chain in combination: " + snap->chain);
        combo.members.push_back(snap->chain);
        total += snap->txs.size();
    }
    std::sort(combo.members.begin(), combo.members.end());

    combo.sequence.reserve(total);
    for (const ChainSnapshot* snap : snapshots)
        for (const TxRecord& tx : snap->txs)
            combo.sequence.push_back(&tx);
    // Ties broken by chain then per-chain order, so the interleaving is a
    // pure function of the inputs.
    std::sort(combo.sequence.begin(), combo.sequence.end(),
              [](const TxRecord* x, const TxRecord* y) {
                  return std::tie(x->timestamp, x->chain, x->ordinal) <
                         std::tie(y->timestamp, y->chain, y->ordinal);
              });
    return combo;
}

bool is_improvement(const Partition& p1, const Partition& p2) {
    for (uint32_t c2 = 0; c2 < p2.cluster_count(); ++c2) {
        std::span<const AddrId> members = p2.cluster_members(c2);
        size_t present = 0;
        uint32_t target = 0;
        bool have_target = false;
        for (AddrId id : members) {
            auto id1 = p1.id_of(p2.key_of(id));
            if (!id1)
                continue;
            ++present;
            uint32_t c1 = p1.cluster_of(*id1);
            if (!have_target) {
                target = c1;
                have_target = true;
            } else if (c1 != target) {
                return false;  // split across two p1 clusters
            }
        }
        if (present != 0 && present != members.size())
            return false;  // neither contained nor disjoint
    }
    return true;
}

HasseResult improvement_hasse(const std::vector<LabeledPartition>& clusterings) {
    const size_t n = clusterings.size();
    for (size_t i = 0; i < n; ++i) {
        if (!clusterings[i].partition)
            throw std::invalid_argument("null partition: " + clusterings[i].label);
        for (size_t j = i + 1; j < n; ++j)
            if (clusterings[i].label == clusterings[j].label)
                throw std::invalid_argument("duplicate label: " + clusterings[i].label);
    }

    // Collapse equivalent clusterings onto their first occurrence.
    std::vector<size_t> group(n);
    HasseResult result;
    for (size_t i = 0; i < n; ++i) {
        group[i] = i;
        for (size_t j = 0; j < i; ++j)
            if (group[j] == j &&
                clusterings[i].partition->equivalent(*clusterings[j].partition)) {
                group[i] = j;
                result.equal_pairs.emplace_back(clusterings[j].label, clusterings[i].label);
                break;
            }
    }

    std::vector<size_t> reps;
    for (size_t i = 0; i < n; ++i)
        if (group[i] == i)
            reps.push_back(i);

    const size_t m = reps.size();
    std::vector<std::vector<bool>> better(m, std::vector<bool>(m, false));
    for (size_t a = 0; a < m; ++a)
        for (size_t b = 0; b < m; ++b)
            if (a != b)
                better[a][b] = is_improvement(*clusterings[reps[a]].partition,
                                              *clusterings[reps[b]].partition);

    for (size_t a = 0; a < m; ++a)
        for (size_t b = a + 1; b < m; ++b)
            if (better[a][b] && better[b][a])
                throw ImprovementCycle("clusterings improve each other but differ: " +
                                       clusterings[reps[a]].label + " and " +
                                       clusterings[reps[b]].label);

    // The relation is not automatically transitive across differing
    // universes, so longer cycles need an explicit check.
    {
        std::vector<int> state(m, 0);  // 0 unvisited, 1 on stack, 2 done
        auto dfs = [&](auto&& self, size_t v) -> void {
            state[v] = 1;
            for (size_t w = 0; w < m; ++w)
                if (better[v][w]) {
                    if (state[w] == 1)
                        throw ImprovementCycle("improvement cycle through " +
                                               clusterings[reps[v]].label + " and " +
                                               clusterings[reps[w]].label);
                    if (state[w] == 0)
                        self(self, w);
                }
            state[v] = 2;
        };
        for (size_t v = 0; v < m; ++v)
            if (state[v] == 0)
                dfs(dfs, v);
    }

    // Keep only covering edges: drop a->b when some c sits between.
    for (size_t a = 0; a < m; ++a)
        for (size_t b = 0; b < m; ++b) {
            if (a == b || !better[a][b])
                continue;
            bool covered = false;
            for (size_t c = 0; c < m && !covered; ++c)
                covered = c != a && c != b && better[a][c] && better[c][b];
            if (!covered)
                result.edges.push_back(
                    {clusterings[reps[a]].label, clusterings[reps[b]].label});
        }

    std::sort(result.edges.begin(), result.edges.end(),
              [](const ImprovementEdge& x, const ImprovementEdge& y) {
                  return std::tie(x.finer, x.coarser) < std::tie(y.finer, y.coarser);
              });
    std::sort(result.equal_pairs.begin(), result.equal_pairs.end());
    return result;
}

ClusterDiff cluster_diff(const Partition& finer, const Partition& coarser) {
    if (!is_improvement(finer, coarser))
        throw std::invalid_argument("cluster_diff: first clustering does not improve the second");

    struct Absorbed {
        std::vector<uint32_t> coarser_cids;
        uint64_t restricted = 0;
    };
    std::unordered_map<uint32_t, Absorbed> absorbed;  // finer cid -> swallowed clusters
    for (uint32_t c2 = 0; c2 < coarser.cluster_count(); ++c2) {
        std::span<const AddrId> members = coarser.cluster_members(c2);
        auto id1 = finer.id_of(coarser.key_of(members.front()));
        if (!id1)
            continue;  // improvement guarantees the whole cluster is absent
        Absorbed& entry = absorbed[finer.cluster_of(*id1)];
        entry.coarser_cids.push_back(c2);
        entry.restricted += members.size();
    }

    ClusterDiff diff;
    std::vector<uint64_t> sizes;
    for (const auto& [fcid, entry] : absorbed) {
        if (entry.coarser_cids.size() < 2)
            continue;
        MergedCluster mc;
        mc.finer_rep = std::string(finer.cluster_rep(fcid));
        for (uint32_t c2 : entry.coarser_cids)
            mc.coarser_reps.emplace_back(coarser.cluster_rep(c2));
        std::sort(mc.coarser_reps.begin(), mc.coarser_reps.end());
        mc.finer_size = finer.cluster_size(fcid);
        mc.restricted_size = entry.restricted;
        sizes.push_back(mc.finer_size);
        diff.merged_clusters.push_back(std::move(mc));
    }
    std::sort(diff.merged_clusters.begin(), diff.merged_clusters.end(),
              [](const MergedCluster& x, const MergedCluster& y) {
                  return x.finer_rep < y.finer_rep;
              });
    std::vector<uint64_t> bins = default_size_bins();
    diff.histogram = histogram_from_sizes(sizes, bins);
    return diff;
}

void diff_to_csv(const ClusterDiff& d, std::ostream& out) {
    out << "finer_rep,n_coarser_clusters,total_addresses\n";
    for (const MergedCluster& mc : d.merged_clusters)
        out << mc.finer_rep << ',' << mc.coarser_reps.size() << ',' << mc.finer_size << '\n';
}

void hasse_to_json(const HasseResult& h, std::ostream& out) {
    nlohmann::ordered_json j;
    j["edges"] = nlohmann::ordered_json::array();
    for (const ImprovementEdge& e : h.edges) {
        nlohmann::ordered_json je;
        je["finer"] = e.finer;
        je["coarser"] = e.coarser;
        j["edges"].push_back(std::move(je));
    }
    j["equal"] = nlohmann::ordered_json::array();
    for (const auto& [a, b] : h.equal_pairs)
        j["equal"].push_back(nlohmann::ordered_json::array({a, b}));
    out << j.dump(2) << '\n';
}

}  // namespace xchain
