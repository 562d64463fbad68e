// Multi-input-heuristic address clustering.
//
// Every address that appears in a transaction (input or output) joins the
// universe; all addresses referenced by the inputs of one transaction are
// assumed to share an owner and are merged.  The resulting partition is
// order-independent; cluster identity is the lexicographically smallest
// member, so two runs over permuted input agree on names.

#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xchain/chain_model.hpp"

namespace xchain {

using AddrId = uint32_t;

class UnknownAddress : public std::runtime_error {
public:
    explicit UnknownAddress(std::string_view key)
        : std::runtime_error("address not in partition universe: " + std::string(key)) {}
};

// First transaction that united two previously separate clusters; `a` and
// `b` are the concrete input addresses whose clusters met.
struct MergeEvent {
    AddrId a = 0;
    AddrId b = 0;
    std::string tx_id;
};

struct PartitionStats {
    uint64_t n_clusters = 0;
    uint64_t n_nontrivial = 0;  // clusters with more than one address
};

struct SizeHistogramBin {
    uint64_t lo = 0;
    uint64_t hi = 0;  // inclusive; UINT64_MAX marks the open-ended bin
    uint64_t clusters = 0;
    uint64_t coverage = 0;  // addresses covered by clusters in this bin
};

struct SizeHistogram {
    std::vector<SizeHistogramBin> bins;
};

struct ClusterView {
    std::string_view representative;
    std::vector<std::string_view> members;  // sorted lexicographically
};

// Immutable result of clustering.  Clusters are indexed 0..cluster_count()
// in ascending representative order; member lists are sorted, and the
// representative is always the first member.
class Partition {
public:
    Partition() = default;
    Partition(Partition&&) = default;
    Partition& operator=(Partition&&) = default;
    Partition(const Partition&) = delete;
    Partition& operator=(const Partition&) = delete;

    size_t universe_size() const { return cluster_of_.size(); }
    uint64_t cluster_count() const { return cluster_offsets_.empty() ? 0 : cluster_offsets_.size() - 1; }
    uint64_t nontrivial_count() const { return n_nontrivial_; }

    bool contains(std::string_view key) const { return index_.count(key) != 0; }
    std::optional<AddrId> id_of(std::string_view key) const;
    const std::string& key_of(AddrId id) const { return keys_[id]; }

    uint32_t cluster_of(AddrId id) const { return cluster_of_[id]; }
    std::string_view cluster_rep(uint32_t cid) const { return keys_[member_ids_[cluster_offsets_[cid]]]; }
    uint32_t cluster_size(uint32_t cid) const {
        return static_cast<uint32_t>(cluster_offsets_[cid + 1] - cluster_offsets_[cid]);
    }
    std::span<const AddrId> cluster_members(uint32_t cid) const {
        return {member_ids_.data() + cluster_offsets_[cid],
                member_ids_.data() + cluster_offsets_[cid + 1]};
    }

    // Key-level lookups; the first two throw UnknownAddress.
    uint32_t cluster_id(std::string_view key) const;
    std::string_view representative(std::string_view key) const;
    std::optional<std::string_view> representative_if(std::string_view key) const;

    const std::vector<MergeEvent>& merge_events() const { return merges_; }
    // Tx ids of the merges that built cluster `cid`, first-seen order, deduped.
    std::vector<std::string_view> merge_witnesses(uint32_t cid) const;

    // Same universe partitioned into the same classes.
    bool equivalent(const Partition& other) const;

private:
    friend class PartitionBuilder;

    std::deque<std::string> keys_;  // deque: growth never moves elements
    std::unordered_map<std::string_view, AddrId> index_;
    std::vector<uint32_t> cluster_of_;       // address id -> cluster id
    std::vector<AddrId> member_ids_;         // concatenated member lists
    std::vector<size_t> cluster_offsets_;    // cluster id -> slice of member_ids_
    uint64_t n_nontrivial_ = 0;
    std::vector<MergeEvent> merges_;
    std::vector<uint32_t> merge_idx_;        // event indices grouped by cluster
    std::vector<size_t> merge_offsets_;
};

// Streaming construction state.  `observe` applies the heuristic to one
// transaction; mid-stream size queries support novelty scoring.
class PartitionBuilder {
public:
    AddrId touch(std::string_view key);  // ensure key is in the universe
    std::optional<AddrId> id_of(std::string_view key) const;
    size_t universe_size() const { return parent_.size(); }

    AddrId find_root(AddrId id);
    uint32_t set_size(AddrId root) const { return size_[root]; }

    // Distinct input addresses of `tx`, touched and deduped.
    std::vector<AddrId> distinct_input_ids(const TxRecord& tx);

    void observe(const TxRecord& tx);

    Partition finish();

private:
    bool unite(AddrId a, AddrId b, const std::string& tx_id);

    std::deque<std::string> keys_;
    std::unordered_map<std::string_view, AddrId> index_;
    std::vector<AddrId> parent_;
    std::vector<uint32_t> size_;
    std::vector<MergeEvent> merges_;
};

Partition cluster_stream(const ChainSnapshot& snap);
Partition cluster_stream(std::span<const TxRecord* const> txs);

PartitionStats partition_stats(const Partition& p);

// find / clusters: key lookup and full enumeration.
std::string_view find(const Partition& p, std::string_view key);
std::vector<ClusterView> clusters(const Partition& p);

// Histogram bin lower edges; must start at 1 and increase strictly.  The
// default {1,2,11,101,1001,10001} separates trivial clusters, small ones,
// and successively larger decades.
std::vector<uint64_t> default_size_bins();
SizeHistogram size_histogram(const Partition& p, std::span<const uint64_t> bin_edges);
SizeHistogram histogram_from_sizes(std::span<const uint64_t> sizes,
                                   std::span<const uint64_t> bin_edges);

// CSV exports: "address,cluster_rep" and "bin_lo,bin_hi,clusters,coverage"
// (the open-ended bin prints bin_hi as "inf").
void partition_to_csv(const Partition& p, std::ostream& out);
void histogram_to_csv(const SizeHistogram& h, std::ostream& out);

}  // namespace xchain
