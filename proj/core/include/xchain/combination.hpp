// Combining chains into one clustering, and comparing clusterings.
//
// A combination interleaves the transactions of several chains by block
// timestamp into one sequence; clustering that sequence lets multi-input
// spends on one chain merge clusters observed on another whenever
// addresses recur across chains.
//
// Clustering P1 improves P2 when every cluster of P2 is either contained
// in a single P1 cluster or disjoint from all of them: P1 has strictly
// consolidated (or merely re-seen) everything P2 knew.  The relation is a
// partial order up to equivalence; its Hasse diagram is the transitive
// reduction over distinct clusterings.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "xchain/chain_model.hpp"
#include "xchain/clustering.hpp"

namespace xchain {

struct CombinationOrdering {
    std::string name;
    std::vector<ChainId> members;
    std::vector<const TxRecord*> sequence;  // (timestamp, chain, ordinal) order
};

// Snapshots must stay alive as long as the ordering is used.
CombinationOrdering combine(const std::vector<const ChainSnapshot*>& snapshots,
                            std::string name);

// True when p1 improves p2 (see above).  Not antisymmetric across
// different universes; equivalence is handled by the Hasse construction.
bool is_improvement(const Partition& p1, const Partition& p2);

class ImprovementCycle : public std::runtime_error {
public:
    explicit ImprovementCycle(const std::string& what) : std::runtime_error(what) {}
};

struct LabeledPartition {
    std::string label;
    const Partition* partition = nullptr;
};

struct ImprovementEdge {
    std::string finer;    // the improving (more consolidated) clustering
    std::string coarser;  // the clustering it improves
};

struct HasseResult {
    std::vector<ImprovementEdge> edges;  // transitive reduction, sorted
    std::vector<std::pair<std::string, std::string>> equal_pairs;
};

// Throws ImprovementCycle if two non-equivalent clusterings improve each
// other (possible only for malformed input, e.g. disjoint universes).
HasseResult improvement_hasse(const std::vector<LabeledPartition>& clusterings);

// One finer cluster that swallowed several coarser ones.
struct MergedCluster {
    std::string finer_rep;
    std::vector<std::string> coarser_reps;  // sorted
    uint64_t finer_size = 0;       // full size in the finer clustering
    uint64_t restricted_size = 0;  // addresses inherited from the coarser ones
};

struct ClusterDiff {
    std::vector<MergedCluster> merged_clusters;  // sorted by finer_rep
    SizeHistogram histogram;                     // over finer_size, default bins
};

// Precondition: is_improvement(finer, coarser); throws std::invalid_argument
// otherwise.
ClusterDiff cluster_diff(const Partition& finer, const Partition& coarser);

// CSV "finer_rep,n_coarser_clusters,total_addresses".
void diff_to_csv(const ClusterDiff& d, std::ostream& out);
// JSON array of {"finer": ..., "coarser": ...} plus equal pairs.
void hasse_to_json(const HasseResult& h, std::ostream& out);

}  // namespace xchain
