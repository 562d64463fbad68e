// Address and cluster novelty series with a trailing moving average.
//
// Address novelty of a transaction: never-before-seen output addresses
// divided by address-bearing outputs.  A transaction is scored against the
// state left by *earlier* transactions only, so the first transaction of a
// sequence always scores 1.
//
// Cluster novelty is defined on transactions whose inputs reference at
// least two distinct addresses: 1 when the spend merges two or more
// clusters that were all trivial (single-address), else 0.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "xchain/chain_model.hpp"

namespace xchain {

enum class NoveltyKind { address, cluster };

struct NoveltyPoint {
    uint64_t ordinal = 0;  // position in the scored sequence
    double raw = 0.0;
    double sma = 0.0;
};

struct NoveltySeries {
    NoveltyKind kind = NoveltyKind::address;
    std::vector<NoveltyPoint> points;
};

// Producers fill sma = raw; run sma() to smooth.
NoveltySeries address_novelty(const ChainSnapshot& snap);
NoveltySeries address_novelty(std::span<const TxRecord* const> txs);
NoveltySeries cluster_novelty(const ChainSnapshot& snap);
NoveltySeries cluster_novelty(std::span<const TxRecord* const> txs);

// Trailing window: the last 1% of a total of `total_n` points, at least 1:
// w = max(1, ceil(total_n / 100)).  Early points average over however many
// points exist so far.
size_t sma_window(size_t total_n);
NoveltySeries sma(const NoveltySeries& series, size_t total_n);
NoveltySeries sma(const NoveltySeries& series);  // total_n = series size

// CSV "ordinal,raw,sma".  max_points > 0 keeps an evenly spaced subset for
// plotting.
void series_to_csv(const NoveltySeries& series, std::ostream& out, size_t max_points = 0);

}  // namespace xchain
