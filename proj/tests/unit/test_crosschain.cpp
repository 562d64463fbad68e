#include "doctest.h"

#include <map>
#include <set>
#include <sstream>

#include "xchain/clustering.hpp"
#include "xchain/crosschain.hpp"

#include "support/fixtures.hpp"

using namespace xchain;
using xchain::test::fig2;
using xchain::test::make_tx;
using xchain::test::random_chain;

namespace {

struct Fig2Parts {
    Partition a, b, c;
    std::map<ChainId, const Partition*> map() const {
        return {{"A", &a}, {"B", &b}, {"C", &c}};
    }
};

Fig2Parts fig2_parts() {
    auto f = fig2();
    return {cluster_stream(f.a), cluster_stream(f.b), cluster_stream(f.c)};
}

}  // namespace

TEST_CASE("co-cluster graph of the worked example") {
    Fig2Parts parts = fig2_parts();
    CoClusterGraph g = build_cocluster_graph(parts.map());

    // five sharing clusters materialize; {pink} on A shares nothing
    CHECK(g.vertex_count() == 5);
    CHECK(g.isolated_clusters.at("A") == 1);
    CHECK(g.isolated_clusters.at("B") == 0);
    CHECK(g.isolated_clusters.at("C") == 0);
    CHECK(g.total_vertex_count() == 6);
    REQUIRE(g.edges.size() == 4);

    // vertices sorted by (chain, cluster representative)
    REQUIRE(g.vertices.size() == 5);
    CHECK(g.vertices[0].chain == "A");
    CHECK(g.vertices[0].cluster == "blue");
    CHECK(g.vertices[1].chain == "B");
    CHECK(g.vertices[1].cluster == "blue");
    CHECK(g.vertices[2].chain == "B");
    CHECK(g.vertices[2].cluster == "green");
    CHECK(g.vertices[3].chain == "C");
    CHECK(g.vertices[3].cluster == "orange");
    CHECK(g.vertices[4].chain == "C");
    CHECK(g.vertices[4].cluster == "red");

    // shared addresses on each edge
    auto shared_between = [&](size_t va, size_t vb) {
        for (const CoClusterEdge& e : g.edges)
            if ((e.a == va && e.b == vb) || (e.a == vb && e.b == va))
                return e.shared;
        return std::vector<AddressKey>{};
    };
    CHECK(shared_between(0, 1) == std::vector<AddressKey>{"blue"});
    CHECK(shared_between(0, 2) == std::vector<AddressKey>{"green"});
    CHECK(shared_between(1, 4) == std::vector<AddressKey>{"red"});
    CHECK(shared_between(2, 3) == std::vector<AddressKey>{"orange"});
    CHECK(shared_between(0, 4).empty());  // A and C never share

    // cluster totals per chain: materialized + isolated = partition clusters
    for (const auto& [chain, p] :
         std::map<ChainId, const Partition*>{{"A", &parts.a}, {"B", &parts.b}, {"C", &parts.c}}) {
        uint64_t materialized = 0;
        for (const CoClusterVertex& v : g.vertices)
            if (v.chain == chain)
                ++materialized;
        CHECK(materialized + g.isolated_clusters.at(chain) == p->cluster_count());
        CHECK(g.cluster_totals.at(chain) == p->cluster_count());
    }
}

TEST_CASE("impacted subgraph keeps only splitting sources and their targets") {
    Fig2Parts parts = fig2_parts();
    CoClusterGraph g = build_cocluster_graph(parts.map());

    CoClusterGraph ab = impacted_subgraph(g, "A", "B");
    REQUIRE(ab.vertices.size() == 3);  // A:blue -> B:blue, B:green
    CHECK(ab.edges.size() == 2);
    std::vector<GraphComponent> comps = connected_components(ab);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].vertices.size() == 3);
    CHECK(classify_star(ab, comps[0], "A") == ComponentShape::star);

    // both B clusters appear in the single component
    size_t b_clusters = 0;
    for (uint32_t v : comps[0].vertices)
        if (ab.vertices[v].chain == "B")
            ++b_clusters;
    CHECK(b_clusters == 2);

    // A sees no C cluster twice (no A-C edges at all)
    CoClusterGraph ac = impacted_subgraph(g, "A", "C");
    CHECK(ac.vertices.empty());
    CHECK(ac.edges.empty());
    CHECK(connected_components(ac).empty());
}

TEST_CASE("indirect merges span chains in the full graph") {
    Fig2Parts parts = fig2_parts();
    CoClusterGraph g = build_cocluster_graph(parts.map());

    std::vector<GraphComponent> comps = connected_components(g);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].vertices.size() == 5);
    std::set<ChainId> chains;
    for (uint32_t v : comps[0].vertices)
        chains.insert(g.vertices[v].chain);
    CHECK(chains == std::set<ChainId>{"A", "B", "C"});

    // multi-hop: with A as source the component pulls in C via B, so it is
    // not a star even though A contributes a single vertex
    std::vector<GraphComponent> hops = multi_hop_components(g, "A");
    REQUIRE(hops.size() == 1);
    CHECK(hops[0].vertices.size() == 5);
    CHECK(classify_star(g, hops[0], "A") == ComponentShape::non_star);
}

TEST_CASE("impact report aggregates per-target and multi-hop views") {
    Fig2Parts parts = fig2_parts();
    ImpactReport rep = impact_report(parts.map(), "A", {});
    CHECK(rep.source == "A");
    REQUIRE(rep.targets.size() == 2);  // B and C, sorted

    const TargetImpact& tb = rep.targets[0];
    CHECK(tb.target == "B");
    CHECK(tb.component_count == 1);
    CHECK(tb.impacted_clusters == 2);
    CHECK(tb.target_cluster_total == 2);
    CHECK(tb.impacted_fraction == doctest::Approx(1.0));
    CHECK(tb.stars == 1);
    CHECK(tb.non_stars == 0);
    REQUIRE(tb.components.size() == 1);
    CHECK(tb.components[0].star);
    CHECK(tb.components[0].source_clusters == std::vector<std::string>{"blue"});
    CHECK(tb.components[0].target_clusters == std::vector<std::string>{"blue", "green"});
    // the A co-spend that built the source cluster
    CHECK(tb.components[0].witness_txs == std::vector<std::string>{"a1"});

    const TargetImpact& tc = rep.targets[1];
    CHECK(tc.target == "C");
    CHECK(tc.component_count == 0);
    CHECK(tc.impacted_clusters == 0);
    CHECK(tc.impacted_fraction == 0.0);

    REQUIRE(rep.multi_hop.size() == 1);
    CHECK_FALSE(rep.multi_hop[0].star);
    CHECK(rep.multi_hop[0].clusters ==
          std::vector<std::string>{"A:blue", "B:blue", "B:green", "C:orange", "C:red"});

    std::ostringstream json;
    impact_to_json(rep, json);
    CHECK(json.str().find("\"source\": \"A\"") != std::string::npos);
    CHECK(json.str().find("\"witness_txs\"") != std::string::npos);
}

TEST_CASE("edge csv lists both endpoints with the shared count") {
    Fig2Parts parts = fig2_parts();
    CoClusterGraph g = build_cocluster_graph(parts.map());
    std::ostringstream csv;
    edges_to_csv(g, csv);
    CHECK(csv.str() ==
          "src_chain,src_cluster,dst_chain,dst_cluster,shared_count\n"
          "A,blue,B,blue,1\n"
          "A,blue,B,green,1\n"
          "B,blue,C,red,1\n"
          "B,green,C,orange,1\n");
}

TEST_CASE("disjoint chains produce an edgeless graph with isolated tallies") {
    ChainSnapshot x, y;
    x.chain = "X";
    x.txs = {make_tx("X", 0, 1, "x0", {}, {"p", "q"}),
             make_tx("X", 1, 2, "x1", {"p", "q"}, {"r"})};
    y.chain = "Y";
    y.txs = {make_tx("Y", 0, 1, "y0", {}, {"s"})};
    Partition px = cluster_stream(x), py = cluster_stream(y);
    CoClusterGraph g = build_cocluster_graph({{"X", &px}, {"Y", &py}});
    CHECK(g.vertices.empty());
    CHECK(g.edges.empty());
    CHECK(g.isolated_clusters.at("X") == px.cluster_count());
    CHECK(g.isolated_clusters.at("Y") == py.cluster_count());
    CHECK(g.total_vertex_count() == px.cluster_count() + py.cluster_count());

    ImpactReport rep = impact_report({{"X", &px}, {"Y", &py}}, "X", {});
    REQUIRE(rep.targets.size() == 1);
    CHECK(rep.targets[0].component_count == 0);
    CHECK(rep.multi_hop.empty());
}

TEST_CASE("graph construction rejects bad input") {
    Fig2Parts parts = fig2_parts();
    std::map<ChainId, const Partition*> with_null = parts.map();
    with_null["D"] = nullptr;
    CHECK_THROWS_AS(build_cocluster_graph(with_null), std::invalid_argument);
    CHECK_THROWS_AS(build_cocluster_graph({}), std::invalid_argument);
    CHECK_THROWS_AS(impact_report(parts.map(), "Z", {}), std::invalid_argument);
}

TEST_CASE("self-sharing across many chains stays consistent") {
    // three chains all reusing one address: pairwise edges between all three
    ChainSnapshot s1, s2, s3;
    for (auto [snap, chain] : {std::pair{&s1, "P"}, {&s2, "Q"}, {&s3, "R"}}) {
        snap->chain = chain;
        snap->txs = {make_tx(chain, 0, 1, std::string(chain) + "0", {}, {"shared", "own"}),
                     make_tx(chain, 1, 2, std::string(chain) + "1", {"shared", "own"},
                             {std::string(chain) + "change"})};
    }
    Partition p1 = cluster_stream(s1), p2 = cluster_stream(s2), p3 = cluster_stream(s3);
    CoClusterGraph g = build_cocluster_graph({{"P", &p1}, {"Q", &p2}, {"R", &p3}});
    CHECK(g.vertices.size() == 3);
    CHECK(g.edges.size() == 3);
    for (const CoClusterEdge& e : g.edges) {
        REQUIRE(e.shared.size() == 2);  // "own" and "shared" both recur
        CHECK(e.a < e.b);
    }
    std::vector<GraphComponent> comps = connected_components(g);
    CHECK(comps.size() == 1);
}
