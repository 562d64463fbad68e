// Shared hand fixtures and generators for tests.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "xchain/chain_model.hpp"

namespace xchain::test {

inline TxRecord make_tx(const ChainId& chain, uint64_t height, int64_t ts,
                        const std::string& id, std::vector<std::string> inputs,
                        std::vector<std::string> out_addrs, uint64_t value = 1) {
    TxRecord tx;
    tx.chain = chain;
    tx.height = height;
    tx.timestamp = ts;
    tx.tx_id = id;
    tx.inputs = std::move(inputs);
    for (std::string& a : out_addrs)
        tx.outputs.push_back({std::move(a), value});
    return tx;
}

// The worked three-chain example: chain A clusters {blue,green} and {pink},
// chain B clusters {blue,red} and {green,orange}, chain C clusters
// {red,white} and {orange}.  Cross-chain address reuse yields exactly four
// co-cluster edges plus one isolated cluster ({pink}); the A cluster
// reaches two B clusters (a star from A's side), and B's two clusters
// bridge onward to C's, so the whole graph is one five-vertex component.
struct Fig2 {
    ChainSnapshot a, b, c;
};

inline Fig2 fig2() {
    Fig2 f;
    f.a.chain = "A";
    f.a.txs = {
        make_tx("A", 0, 100, "a0", {}, {"blue", "green", "pink"}),
        make_tx("A", 1, 110, "a1", {"blue", "green"}, {"pink"}),
    };
    f.b.chain = "B";
    f.b.txs = {
        make_tx("B", 0, 100, "b0", {}, {"blue", "red", "green", "orange"}),
        make_tx("B", 1, 111, "b1", {"blue", "red"}, {"green"}),
        make_tx("B", 2, 121, "b2", {"green", "orange"}, {"blue"}),
    };
    f.c.chain = "C";
    f.c.txs = {
        make_tx("C", 0, 100, "c0", {}, {"red", "white", "orange"}),
        make_tx("C", 1, 112, "c1", {"red", "white"}, {"orange"}),
    };
    for (ChainSnapshot* s : {&f.a, &f.b, &f.c})
        for (size_t i = 0; i < s->txs.size(); ++i)
            s->txs[i].ordinal = i;
    return f;
}

// Random but reproducible chain: a mix of coinbases, co-spends of 1..4
// addresses drawn from the funded pool, and occasional address reuse.
inline ChainSnapshot random_chain(const ChainId& chain, size_t n_txs, uint64_t seed,
                                  double coinbase_prob = 0.3, double reuse_prob = 0.2) {
    std::mt19937_64 eng(seed);
    auto below = [&](uint64_t n) { return n == 0 ? 0 : eng() % n; };
    auto unit = [&](void) { return (eng() >> 11) * 0x1.0p-53; };

    ChainSnapshot snap;
    snap.chain = chain;
    std::vector<std::string> pool;
    uint64_t next_addr = 0;
    auto fresh = [&] {
        pool.push_back("x" + std::to_string(next_addr++));
        return pool.back();
    };

    for (size_t i = 0; i < n_txs; ++i) {
        TxRecord tx;
        tx.chain = chain;
        tx.height = i / 3;
        tx.timestamp = 1000 + static_cast<int64_t>(i);
        tx.tx_id = chain + "-" + std::to_string(i);
        tx.ordinal = i;
        if (pool.empty() || unit() < coinbase_prob) {
            size_t outs = 1 + below(3);
            for (size_t k = 0; k < outs; ++k)
                tx.outputs.push_back({fresh(), 1});
        } else {
            size_t want = 1 + below(4);
            for (size_t k = 0; k < want; ++k) {
                const std::string& a = pool[below(pool.size())];
                if (std::find(tx.inputs.begin(), tx.inputs.end(), a) == tx.inputs.end())
                    tx.inputs.push_back(a);
            }
            size_t outs = 1 + below(2);
            for (size_t k = 0; k < outs; ++k) {
                if (unit() < reuse_prob)
                    tx.outputs.push_back({pool[below(pool.size())], 1});
                else
                    tx.outputs.push_back({fresh(), 1});
            }
        }
        snap.txs.push_back(std::move(tx));
    }
    return snap;
}

}  // namespace xchain::test
