// Microbenchmarks for the hot paths: streaming clustering, co-cluster
// graph construction, and series smoothing.  Input comes from the
// synthetic generator so the size/shape knobs match real usage.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "xchain/clustering.hpp"
#include "xchain/crosschain.hpp"
#include "xchain/novelty.hpp"
#include "xchain/synthgen.hpp"

namespace {

const xchain::GenerationResult& scenario(uint32_t budget) {
    static std::map<uint32_t, xchain::GenerationResult> cache;
    auto it = cache.find(budget);
    if (it == cache.end()) {
        xchain::Scenario s;
        s.seed = 42;
        s.n_entities = 160;
        s.txs_per_chain = {{"btclike", budget}, {"ltclike", budget}, {"dogelike", budget}};
        it = cache.emplace(budget, xchain::generate(s)).first;
    }
    return it->second;
}

struct GraphFixture {
    std::vector<xchain::Partition> store;
    std::map<xchain::ChainId, const xchain::Partition*> parts;
};

const GraphFixture& graph_fixture(uint32_t budget) {
    static std::map<uint32_t, GraphFixture> cache;
    auto it = cache.find(budget);
    if (it == cache.end()) {
        const xchain::GenerationResult& r = scenario(budget);
        GraphFixture f;
        f.store.reserve(r.snapshots.size());
        for (const xchain::ChainSnapshot& snap : r.snapshots)
            f.store.push_back(xchain::cluster_stream(snap));
        for (size_t i = 0; i < r.snapshots.size(); ++i)
            f.parts.emplace(r.snapshots[i].chain, &f.store[i]);
        it = cache.emplace(budget, std::move(f)).first;
    }
    return it->second;
}

void BM_ClusterStream(benchmark::State& state) {
    const xchain::ChainSnapshot& snap =
        scenario(static_cast<uint32_t>(state.range(0))).snapshots.front();
    for (auto _ : state) {
        xchain::Partition p = xchain::cluster_stream(snap);
        benchmark::DoNotOptimize(p.cluster_count());
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * snap.txs.size()));
}
BENCHMARK(BM_ClusterStream)->Arg(2000)->Arg(20000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_CoClusterGraph(benchmark::State& state) {
    const GraphFixture& f = graph_fixture(static_cast<uint32_t>(state.range(0)));
    for (auto _ : state) {
        xchain::CoClusterGraph g = xchain::build_cocluster_graph(f.parts);
        benchmark::DoNotOptimize(g.edges.size());
    }
}
BENCHMARK(BM_CoClusterGraph)->Arg(2000)->Arg(20000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_Sma(benchmark::State& state) {
    xchain::NoveltySeries series;
    const auto n = static_cast<uint64_t>(state.range(0));
    series.points.reserve(n);
    for (uint64_t i = 0; i < n; ++i)
        series.points.push_back({i, static_cast<double>(i % 7) / 7.0, 0.0});
    for (auto _ : state) {
        xchain::NoveltySeries smooth = xchain::sma(series);
        benchmark::DoNotOptimize(smooth.points.back().sma);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * n));
}
BENCHMARK(BM_Sma)->Arg(10000)->Arg(1000000);

}  // namespace

BENCHMARK_MAIN();
