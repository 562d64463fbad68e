#include "xchain/novelty.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <unordered_set>

#include "xchain/clustering.hpp"

namespace xchain {

namespace {

const TxRecord& deref(const TxRecord& tx) { return tx; }
const TxRecord& deref(const TxRecord* tx) { return *tx; }

template <class Range>
NoveltySeries address_novelty_impl(const Range& txs) {
    NoveltySeries series;
    series.kind = NoveltyKind::address;
    std::unordered_set<std::string_view> seen;

    uint64_t ordinal = 0;
    std::vector<std::string_view> fresh;  // new addresses within one tx
    for (const auto& t : txs) {
        const TxRecord& tx = deref(t);
        size_t denom = 0;
        fresh.clear();
        for (const OutputRecord& o : tx.outputs) {
            if (!o.address)
                continue;
            ++denom;
            std::string_view a = *o.address;
            if (!seen.count(a) && std::find(fresh.begin(), fresh.end(), a) == fresh.end())
                fresh.push_back(a);
        }
        if (denom > 0) {
            double raw = static_cast<double>(fresh.size()) / static_cast<double>(denom);
            series.points.push_back({ordinal, raw, raw});
        }
        // State updates only after scoring: a tx never sees itself.
        for (const AddressKey& a : tx.inputs)
            seen.insert(a);
        for (const OutputRecord& o : tx.outputs)
            if (o.address)
                seen.insert(*o.address);
        ++ordinal;
    }
    return series;
}

template <class Range>
NoveltySeries cluster_novelty_impl(const Range& txs) {
    NoveltySeries series;
    series.kind = NoveltyKind::cluster;
    PartitionBuilder builder;

    uint64_t ordinal = 0;
    std::vector<AddrId> roots;
    for (const auto& t : txs) {
        const TxRecord& tx = deref(t);
        std::vector<AddrId> ids = builder.distinct_input_ids(tx);
        if (ids.size() >= 2) {
            roots.clear();
            bool all_trivial = true;
            for (AddrId id : ids) {
                AddrId r = builder.find_root(id);
                if (std::find(roots.begin(), roots.end(), r) == roots.end()) {
                    roots.push_back(r);
                    all_trivial = all_trivial && builder.set_size(r) == 1;
                }
            }
            double raw = (roots.size() >= 2 && all_trivial) ? 1.0 : 0.0;
            series.points.push_back({ordinal, raw, raw});
        }
        builder.observe(tx);
        ++ordinal;
    }
    return series;
}

}  // namespace

NoveltySeries address_novelty(const ChainSnapshot& snap) {
    return address_novelty_impl(snap.txs);
}

NoveltySeries address_novelty(std::span<const TxRecord* const> txs) {
    return address_novelty_impl(txs);
}

NoveltySeries cluster_novelty(const ChainSnapshot& snap) {
    return cluster_novelty_impl(snap.txs);
}

NoveltySeries cluster_novelty(std::span<const TxRecord* const> txs) {
    return cluster_novelty_impl(txs);
}

size_t sma_window(size_t total_n) {
    return std::max<size_t>(1, (total_n + 99) / 100);
}

NoveltySeries sma(const NoveltySeries& series, size_t total_n) {
    const size_t w = sma_window(total_n);
    NoveltySeries out = series;

    // Long-double prefix sums keep the windowed means well inside 1e-12 of
    // an exact recomputation for series of this size.
    std::vector<long double> prefix(series.points.size() + 1, 0.0L);
    for (size_t i = 0; i < series.points.size(); ++i)
        prefix[i + 1] = prefix[i] + series.points[i].raw;

    for (size_t i = 0; i < out.points.size(); ++i) {
        size_t lo = (i + 1 >= w) ? i + 1 - w : 0;
        size_t count = i + 1 - lo;
        out.points[i].sma = static_cast<double>((prefix[i + 1] - prefix[lo]) / count);
    }
    return out;
}

NoveltySeries sma(const NoveltySeries& series) {
    return sma(series, series.points.size());
}

void series_to_csv(const NoveltySeries& series, std::ostream& out, size_t max_points) {
    out << "ordinal,raw,sma\n";
    const size_t n = series.points.size();
    size_t stride = 1;
    if (max_points > 0 && n > max_points)
        stride = (n + max_points - 1) / max_points;

    auto emit = [&](const NoveltyPoint& p) {
        out << p.ordinal << ',' << std::setprecision(17) << p.raw << ',' << p.sma << '\n';
    };
    size_t last_emitted = n;  // sentinel
    for (size_t i = 0; i < n; i += stride) {
        emit(series.points[i]);
        last_emitted = i;
    }
    if (n > 0 && last_emitted != n - 1)
        emit(series.points[n - 1]);
}

}  // namespace xchain
