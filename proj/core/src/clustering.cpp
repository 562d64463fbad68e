#include "xchain/clustering.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

namespace xchain {

// ---------------------------------------------------------------- builder

AddrId PartitionBuilder::touch(std::string_view key) {
    auto it = index_.find(key);
    if (it != index_.end())
        return it->second;
    AddrId id = static_cast<AddrId>(parent_.size());
    keys_.emplace_back(key);
    index_.emplace(std::string_view(keys_.back()), id);
    parent_.push_back(id);
    size_.push_back(1);
    return id;
}

std::optional<AddrId> PartitionBuilder::id_of(std::string_view key) const {
    auto it = index_.find(key);
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

AddrId PartitionBuilder::find_root(AddrId id) {
    while (parent_[id] != id) {
        parent_[id] = parent_[parent_[id]];  // path halving
        id = parent_[id];
    }
    return id;
}

bool PartitionBuilder::unite(AddrId a, AddrId b, const std::string& tx_id) {
    AddrId ra = find_root(a);
    AddrId rb = find_root(b);
    if (ra == rb)
        return false;
    if (size_[ra] < size_[rb])
        std::swap(ra, rb);
    parent_[rb] = ra;
    size_[ra] += size_[rb];
    merges_.push_back({a, b, tx_id});
    return true;
}

std::vector<AddrId> PartitionBuilder::distinct_input_ids(const TxRecord& tx) {
    std::vector<AddrId> ids;
    ids.reserve(tx.inputs.size());
    for (const AddressKey& a : tx.inputs)
        ids.push_back(touch(a));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

void PartitionBuilder::observe(const TxRecord& tx) {
    std::vector<AddrId> ids = distinct_input_ids(tx);
    for (size_t i = 1; i < ids.size(); ++i)
        unite(ids[0], ids[i], tx.tx_id);
    for (const OutputRecord& o : tx.outputs)
        if (o.address)
            touch(*o.address);
}

Partition PartitionBuilder::finish() {
    const size_t n = parent_.size();

    // Key-ascending scan: the first member seen of each set is its
    // lexicographic minimum, so cluster ids come out in representative order
    // and member lists land sorted.
    std::vector<AddrId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](AddrId a, AddrId b) { return keys_[a] < keys_[b]; });

    Partition p;
    p.cluster_of_.resize(n);
    std::vector<uint32_t> root_cid(n, UINT32_MAX);
    std::vector<uint32_t> sizes;
    for (AddrId id : order) {
        AddrId root = find_root(id);
        if (root_cid[root] == UINT32_MAX) {
            root_cid[root] = static_cast<uint32_t>(sizes.size());
            sizes.push_back(size_[root]);
        }
        p.cluster_of_[id] = root_cid[root];
    }

    p.cluster_offsets_.resize(sizes.size() + 1, 0);
    for (size_t c = 0; c < sizes.size(); ++c) {
        p.cluster_offsets_[c + 1] = p.cluster_offsets_[c] + sizes[c];
        if (sizes[c] > 1)
            ++p.n_nontrivial_;
    }
    p.member_ids_.resize(n);
    std::vector<size_t> cursor(p.cluster_offsets_.begin(), p.cluster_offsets_.end() - 1);
    for (AddrId id : order)
        p.member_ids_[cursor[p.cluster_of_[id]]++] = id;

    // Group merge provenance by final cluster.
    p.merge_offsets_.resize(sizes.size() + 1, 0);
    for (const MergeEvent& e : merges_)
        ++p.merge_offsets_[p.cluster_of_[e.a] + 1];
    for (size_t c = 1; c < p.merge_offsets_.size(); ++c)
        p.merge_offsets_[c] += p.merge_offsets_[c - 1];
    p.merge_idx_.resize(merges_.size());
    std::vector<size_t> mcursor(p.merge_offsets_.begin(), p.merge_offsets_.end() - 1);
    for (uint32_t i = 0; i < merges_.size(); ++i)
        p.merge_idx_[mcursor[p.cluster_of_[merges_[i].a]]++] = i;

    p.keys_ = std::move(keys_);
    p.index_ = std::move(index_);
    p.merges_ = std::move(merges_);
    return p;
}

// -------------------------------------------------------------- partition

std::optional<AddrId> Partition::id_of(std::string_view key) const {
    auto it = index_.find(key);
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

uint32_t Partition::cluster_id(std::string_view key) const {
    auto id = id_of(key);
    if (!id)
        throw UnknownAddress(key);
    return cluster_of_[*id];
}

std::string_view Partition::representative(std::string_view key) const {
    return cluster_rep(cluster_id(key));
}

std::optional<std::string_view> Partition::representative_if(std::string_view key) const {
    auto id = id_of(key);
    if (!id)
        return std::nullopt;
    return cluster_rep(cluster_of_[*id]);
}

std::vector<std::string_view> Partition::merge_witnesses(uint32_t cid) const {
    std::vector<std::string_view> txs;
    for (size_t i = merge_offsets_[cid]; i < merge_offsets_[cid + 1]; ++i) {
        std::string_view id = merges_[merge_idx_[i]].tx_id;
        if (std::find(txs.begin(), txs.end(), id) == txs.end())
            txs.push_back(id);
    }
    return txs;
}

bool Partition::equivalent(const Partition& other) const {
    if (universe_size() != other.universe_size() || cluster_count() != other.cluster_count())
        return false;
    for (const auto& [key, id] : index_) {
        auto oid = other.id_of(key);
        if (!oid)
            return false;
        if (cluster_rep(cluster_of_[id]) != other.cluster_rep(other.cluster_of_[*oid]))
            return false;
    }
    return true;
}

// -------------------------------------------------------------- free fns

Partition cluster_stream(const ChainSnapshot& snap) {
    PartitionBuilder b;
    for (const TxRecord& tx : snap.txs)
        b.observe(tx);
    return b.finish();
}

Partition cluster_stream(std::span<const TxRecord* const> txs) {
    PartitionBuilder b;
    for (const TxRecord* tx : txs)
        b.observe(*tx);
    return b.finish();
}

PartitionStats partition_stats(const Partition& p) {
    return {p.cluster_count(), p.nontrivial_count()};
}

std::string_view find(const Partition& p, std::string_view key) {
    return p.representative(key);
}

std::vector<ClusterView> clusters(const Partition& p) {
    std::vector<ClusterView> out;
    out.reserve(p.cluster_count());
    for (uint32_t cid = 0; cid < p.cluster_count(); ++cid) {
        ClusterView view;
        view.representative = p.cluster_rep(cid);
        for (AddrId id : p.cluster_members(cid))
            view.members.push_back(p.key_of(id));
        out.push_back(std::move(view));
    }
    return out;
}

std::vector<uint64_t> default_size_bins() {
    return {1, 2, 11, 101, 1001, 10001};
}

SizeHistogram histogram_from_sizes(std::span<const uint64_t> sizes,
                                   std::span<const uint64_t> bin_edges) {
    if (bin_edges.empty() || bin_edges[0] != 1)
        throw std::invalid_argument("histogram bins must start at 1");
    if (!std::is_sorted(bin_edges.begin(), bin_edges.end()) ||
        std::adjacent_find(bin_edges.begin(), bin_edges.end()) != bin_edges.end())
        throw std::invalid_argument("histogram bin edges must increase strictly");

    SizeHistogram h;
    for (size_t i = 0; i < bin_edges.size(); ++i) {
        SizeHistogramBin bin;
        bin.lo = bin_edges[i];
        bin.hi = i + 1 < bin_edges.size() ? bin_edges[i + 1] - 1 : UINT64_MAX;
        h.bins.push_back(bin);
    }
    for (uint64_t s : sizes) {
        if (s == 0)
            throw std::invalid_argument("cluster sizes must be positive");
        size_t i = std::upper_bound(bin_edges.begin(), bin_edges.end(), s) - bin_edges.begin();
        SizeHistogramBin& bin = h.bins[i - 1];
        ++bin.clusters;
        bin.coverage += s;
    }
    return h;
}

SizeHistogram size_histogram(const Partition& p, std::span<const uint64_t> bin_edges) {
    std::vector<uint64_t> sizes;
    sizes.reserve(p.cluster_count());
    for (uint32_t cid = 0; cid < p.cluster_count(); ++cid)
        sizes.push_back(p.cluster_size(cid));
    return histogram_from_sizes(sizes, bin_edges);
}

void partition_to_csv(const Partition& p, std::ostream& out) {
    out << "address,cluster_rep\n";
    for (uint32_t cid = 0; cid < p.cluster_count(); ++cid) {
        std::string_view rep = p.cluster_rep(cid);
        for (AddrId id : p.cluster_members(cid))
            out << p.key_of(id) << ',' << rep << '\n';
    }
}

void histogram_to_csv(const SizeHistogram& h, std::ostream& out) {
    out << "bin_lo,bin_hi,clusters,coverage\n";
    for (const SizeHistogramBin& bin : h.bins) {
        out << bin.lo << ',';
        if (bin.hi == UINT64_MAX)
            out << "inf";
        else
            out << bin.hi;
        out << ',' << bin.clusters << ',' << bin.coverage << '\n';
    }
}

}  // namespace xchain
