#include "doctest.h"

#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "xchain/clustering.hpp"
#include "xchain/crosschain.hpp"
#include "xchain/synthgen.hpp"

using namespace xchain;

namespace {

Scenario small_scenario(uint64_t seed) {
    Scenario s;
    s.seed = seed;
    s.n_entities = 50;
    s.base_chains = {"alphachain", "betachain"};
    s.txs_per_chain = {{"alphachain", 420}, {"betachain", 360}};
    s.airdrop.chain = "gammachain";
    return s;
}

std::string chain_bytes(const ChainSnapshot& snap) {
    std::ostringstream out;
    write_chain_stream(snap, out);
    return out.str();
}

std::string truth_bytes(const GroundTruth& gt) {
    std::ostringstream out;
    ground_truth_to_json(gt, out);
    return out.str();
}

std::map<AddressKey, uint64_t> replay_balances(const ChainSnapshot& snap, uint64_t max_height) {
    std::map<AddressKey, uint64_t> bal;
    for (const TxRecord& tx : snap.txs) {
        if (tx.height > max_height)
            break;
        for (const AddressKey& a : tx.inputs)
            bal[a] = 0;  // a spend consumes the address's whole balance
        for (const OutputRecord& o : tx.outputs)
            if (o.address)
                bal[*o.address] += o.value;
    }
    return bal;
}

}  // namespace

TEST_CASE("one seed yields identical bytes, another seed does not") {
    Scenario s = small_scenario(5);
    GenerationResult r1 = generate(s);
    GenerationResult r2 = generate(s);
    REQUIRE(r1.snapshots.size() == r2.snapshots.size());
    for (size_t i = 0; i < r1.snapshots.size(); ++i)
        CHECK(chain_bytes(r1.snapshots[i]) == chain_bytes(r2.snapshots[i]));
    CHECK(truth_bytes(r1.truth) == truth_bytes(r2.truth));

    Scenario other = small_scenario(6);
    GenerationResult r3 = generate(other);
    bool any_differs = truth_bytes(r3.truth) != truth_bytes(r1.truth);
    for (size_t i = 0; i < r1.snapshots.size() && !any_differs; ++i)
        any_differs = chain_bytes(r3.snapshots[i]) != chain_bytes(r1.snapshots[i]);
    CHECK(any_differs);
}

TEST_CASE("scenario json round trips") {
    Scenario s = small_scenario(9);
    s.claim = {0.5, 0.2, 0.2, 0.1};
    s.airdrop.grant_value = 12;
    s.airdrop.snapshot_fraction = 0.4;
    s.airdrop.snapshot_heights = {{"alphachain", 33}};
    s.overlap_kit = false;

    std::ostringstream out;
    scenario_to_json(s, out);
    std::istringstream in(out.str());
    Scenario t = scenario_from_json(in, "roundtrip");

    CHECK(t.seed == s.seed);
    CHECK(t.n_entities == s.n_entities);
    CHECK(t.base_chains == s.base_chains);
    CHECK(t.txs_per_chain == s.txs_per_chain);
    CHECK(t.claim.sweep_all == doctest::Approx(0.5));
    CHECK(t.claim.key_sale == doctest::Approx(0.1));
    CHECK(t.airdrop.chain == "gammachain");
    CHECK(t.airdrop.grant_value == 12);
    CHECK(t.airdrop.snapshot_fraction == doctest::Approx(0.4));
    CHECK(t.airdrop.snapshot_heights == s.airdrop.snapshot_heights);
    CHECK(t.overlap_kit == false);
}

TEST_CASE("scenario json rejects unknown keys and bad values") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return scenario_from_json(in, "inline");
    };
    CHECK_THROWS_AS(parse("[]"), std::invalid_argument);
    CHECK_THROWS_AS(parse("{\"sede\": 1}"), std::invalid_argument);
    CHECK_THROWS_AS(parse("{\"claim_mix\": {\"sweepall\": 1}}"), std::invalid_argument);
    CHECK_THROWS_AS(parse("{\"airdrop\": {\"grantvalue\": 5}}"), std::invalid_argument);
    CHECK_THROWS_AS(parse("{\"claim_mix\": {\"sweep_all\": 0.9}}"),
                    std::invalid_argument);  // mix no longer sums to 1
    CHECK_THROWS_AS(parse("{\"airdrop\": {\"snapshot_fraction\": 1.0}}"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse("{\"airdrop\": {\"chain\": \"btclike\"}}"),
                    std::invalid_argument);  // collides with a base chain
    CHECK_THROWS_AS(parse("{\"txs_per_chain\": {\"nochain\": 100}}"), std::invalid_argument);
    CHECK_THROWS_AS(parse("{\"n_entities\": 0}"), std::invalid_argument);
    CHECK_THROWS_AS(parse("{\"max_wallet_size\": 1}"), std::invalid_argument);
    CHECK_THROWS_AS(parse("{\"base_chains\": [\"a\", \"a\"]}"), std::invalid_argument);
    CHECK_NOTHROW(parse("{\"seed\": 3, \"overlap_kit\": false}"));
}

TEST_CASE("generated chains are well-formed and round trip the parser") {
    GenerationResult r = generate(small_scenario(11));
    REQUIRE(r.snapshots.size() == 3);
    CHECK(r.snapshots[0].chain == "alphachain");
    CHECK(r.snapshots[1].chain == "betachain");
    CHECK(r.snapshots[2].chain == "gammachain");
    CHECK(r.truth.base_chains == std::vector<ChainId>{"alphachain", "betachain"});
    CHECK(r.truth.airdrop_chain == "gammachain");

    for (const ChainSnapshot& snap : r.snapshots) {
        REQUIRE_FALSE(snap.txs.empty());
        for (size_t i = 0; i < snap.txs.size(); ++i) {
            const TxRecord& tx = snap.txs[i];
            CHECK(tx.ordinal == i);
            CHECK_FALSE(tx.outputs.empty());
            if (i > 0) {
                CHECK(tx.height >= snap.txs[i - 1].height);
                CHECK(tx.timestamp >= snap.txs[i - 1].timestamp);
            }
        }

        std::istringstream in(chain_bytes(snap));
        std::vector<std::string> warnings;
        ChainSnapshot back = parse_chain_stream(in, snap.chain, snap.chain, &warnings);
        CHECK(back.txs == snap.txs);
        // the generator never spends an address it has not funded
        CHECK(warnings.empty());
    }
}

TEST_CASE("ground truth matches a replay of the chain files") {
    GenerationResult r = generate(small_scenario(13));
    const GroundTruth& gt = r.truth;

    // qualifying = exactly the addresses with a balance at the snapshot
    for (size_t c = 0; c < gt.base_chains.size(); ++c) {
        const ChainSnapshot& snap = r.snapshots[c];
        uint64_t snap_h = gt.snapshot_heights.at(snap.chain);
        CHECK(snap_h < snap.txs.back().height);  // snapshot falls inside the chain

        std::set<AddressKey> expect;
        for (const auto& [addr, bal] : replay_balances(snap, snap_h))
            if (bal >= 1)
                expect.insert(addr);
        const std::vector<AddressKey>& q = gt.qualifying.at(snap.chain);
        std::set<AddressKey> got(q.begin(), q.end());
        CHECK(got.size() == q.size());
        CHECK(got == expect);
    }

    // granted = union of the per-chain qualifying sets, deduped
    std::set<AddressKey> granted(gt.granted.begin(), gt.granted.end());
    CHECK(granted.size() == gt.granted.size());
    std::set<AddressKey> union_q;
    for (const auto& [chain, q] : gt.qualifying)
        union_q.insert(q.begin(), q.end());
    CHECK(granted == union_q);

    // every grant is an input-less tx inside the grant era paying grant_value
    const ChainSnapshot& air = r.snapshots.back();
    std::set<AddressKey> grant_outputs;
    for (const TxRecord& tx : air.txs) {
        if (tx.inputs.empty()) {
            CHECK(tx.timestamp >= gt.grant_time_begin);
            CHECK(tx.timestamp <= gt.grant_time_end);
            for (const OutputRecord& o : tx.outputs) {
                REQUIRE(o.address.has_value());
                CHECK(o.value == 46);
                CHECK(grant_outputs.insert(*o.address).second);  // one grant each
            }
        } else {
            CHECK(tx.timestamp > gt.grant_time_end);  // claims come after
        }
    }
    CHECK(grant_outputs == granted);

    // appearances really are the distinct addresses of each chain, in order
    for (const ChainSnapshot& snap : r.snapshots) {
        std::vector<AddressKey> seen;
        std::set<AddressKey> seen_set;
        for (const TxRecord& tx : snap.txs) {
            for (const AddressKey& a : tx.inputs)
                if (seen_set.insert(a).second)
                    seen.push_back(a);
            for (const OutputRecord& o : tx.outputs)
                if (o.address && seen_set.insert(*o.address).second)
                    seen.push_back(*o.address);
        }
        CHECK(gt.appearances.at(snap.chain) == seen);
    }

    // each address belongs to exactly one entity
    std::map<ChainId, std::set<AddressKey>> claimed;
    for (const auto& per_entity : gt.entity_addresses)
        for (const auto& [chain, addrs] : per_entity)
            for (const AddressKey& a : addrs)
                CHECK(claimed[chain].insert(a).second);

    // key sales connect a key-selling entity to a sweeping one
    for (const KeySale& sale : gt.key_sales) {
        CHECK(sale.seller != sale.buyer);
        CHECK(gt.behaviors.at(sale.seller) == ClaimBehavior::key_sale);
        CHECK(gt.behaviors.at(sale.buyer) == ClaimBehavior::sweep_all);
        CHECK(granted.count(sale.address) == 1);
    }

    // the json view parses and names every section
    nlohmann::json j = nlohmann::json::parse(truth_bytes(gt));
    for (const char* key : {"base_chains", "airdrop_chain", "snapshot_heights", "grant_era",
                            "entities", "key_sales", "qualifying", "granted", "cospend_groups",
                            "appearances", "expected_impact"})
        CHECK(j.contains(key));
}

TEST_CASE("ground-truth co-spend groups equal the pipeline's clusters") {
    GenerationResult r = generate(small_scenario(17));
    for (const ChainSnapshot& snap : r.snapshots) {
        Partition p = cluster_stream(snap);
        std::set<std::vector<AddressKey>> nontrivial;
        for (uint32_t c = 0; c < p.cluster_count(); ++c) {
            if (p.cluster_size(c) < 2)
                continue;
            std::vector<AddressKey> members;
            for (AddrId id : p.cluster_members(c))
                members.push_back(p.key_of(id));
            nontrivial.insert(std::move(members));
        }
        std::set<std::vector<AddressKey>> expected;
        for (std::vector<AddressKey> g : r.truth.cospend_groups.at(snap.chain)) {
            std::sort(g.begin(), g.end());
            expected.insert(std::move(g));
        }
        CHECK(nontrivial == expected);
    }
}

TEST_CASE("explicit snapshot heights are honoured") {
    Scenario s = small_scenario(19);
    s.airdrop.snapshot_heights = {{"alphachain", 40}, {"betachain", 25}};
    GenerationResult r = generate(s);
    CHECK(r.truth.snapshot_heights.at("alphachain") == 40);
    CHECK(r.truth.snapshot_heights.at("betachain") == 25);
}

TEST_CASE("measured impact equals the prediction") {
    for (uint64_t seed : {21u, 22u}) {
        Scenario s = small_scenario(seed);
        GenerationResult r = generate(s);

        std::vector<Partition> parts;
        parts.reserve(r.snapshots.size());
        for (const ChainSnapshot& snap : r.snapshots)
            parts.push_back(cluster_stream(snap));
        std::map<ChainId, const Partition*> pmap;
        for (size_t i = 0; i < parts.size(); ++i)
            pmap[r.snapshots[i].chain] = &parts[i];

        ImpactReport rep = impact_report(pmap, r.truth.airdrop_chain, {});
        REQUIRE(rep.targets.size() == r.truth.base_chains.size());
        for (const TargetImpact& ti : rep.targets) {
            const ExpectedImpact& want = r.truth.expected.at(ti.target);
            CHECK(ti.component_count == want.component_count);
            CHECK(ti.impacted_clusters == want.impacted_clusters);
            CHECK(ti.stars == want.stars);
            CHECK(ti.non_stars == want.non_stars);
        }
    }
}

TEST_CASE("sweep-only claims produce pure star impact") {
    Scenario s = small_scenario(23);
    s.claim = {1.0, 0.0, 0.0, 0.0};
    s.overlap_kit = false;
    GenerationResult r = generate(s);
    uint64_t components = 0;
    for (const auto& [chain, ei] : r.truth.expected) {
        CHECK(ei.non_stars == 0);
        CHECK(ei.stars == ei.component_count);
        components += ei.component_count;
    }
    CHECK(components > 0);
}

TEST_CASE("expected impact from hand-written ground truth") {
    GroundTruth gt;
    gt.base_chains = {"base"};
    gt.airdrop_chain = "air";
    gt.appearances["base"] = {"p", "q", "r"};
    gt.appearances["air"] = {"p", "q", "r", "d"};

    SUBCASE("a sweep bridging two trivial clusters is one star") {
        gt.cospend_groups["base"] = {};
        gt.cospend_groups["air"] = {{"p", "q", "d"}};
        ExpectedImpact ei = expected_impact(gt, "air", "base");
        CHECK(ei == ExpectedImpact{1, 2, 1, 0});
    }
    SUBCASE("per-address claims merge nothing") {
        gt.cospend_groups["base"] = {};
        gt.cospend_groups["air"] = {};
        ExpectedImpact ei = expected_impact(gt, "air", "base");
        CHECK(ei == ExpectedImpact{0, 0, 0, 0});
    }
    SUBCASE("a sweep inside one target cluster is invisible") {
        gt.cospend_groups["base"] = {{"p", "q"}};
        gt.cospend_groups["air"] = {{"p", "q"}};
        ExpectedImpact ei = expected_impact(gt, "air", "base");
        CHECK(ei == ExpectedImpact{0, 0, 0, 0});
    }
    SUBCASE("two sweeps sharing a target cluster form one non-star") {
        gt.cospend_groups["base"] = {};
        gt.cospend_groups["air"] = {{"p", "q"}, {"q", "r"}};
        ExpectedImpact ei = expected_impact(gt, "air", "base");
        CHECK(ei == ExpectedImpact{1, 3, 0, 1});
    }
    SUBCASE("addresses missing from the target chain are ignored") {
        gt.cospend_groups["base"] = {};
        gt.cospend_groups["air"] = {{"d", "p"}};
        ExpectedImpact ei = expected_impact(gt, "air", "base");
        CHECK(ei == ExpectedImpact{0, 0, 0, 0});
    }
    CHECK_THROWS_AS(expected_impact(gt, "air", "air"), std::invalid_argument);
}

TEST_CASE("single chain without the overlap kit still generates") {
    Scenario s;
    s.seed = 29;
    s.n_entities = 25;
    s.base_chains = {"solo"};
    s.txs_per_chain = {{"solo", 240}};
    s.overlap_kit = false;
    GenerationResult r = generate(s);
    REQUIRE(r.snapshots.size() == 2);
    CHECK(r.snapshots[0].chain == "solo");
    CHECK(r.snapshots[1].chain == "clamlike");
    CHECK(r.truth.expected.count("solo") == 1);
    CHECK_FALSE(r.truth.granted.empty());
}

TEST_CASE("claim behavior names") {
    CHECK(to_string(ClaimBehavior::sweep_all) == "sweep_all");
    CHECK(to_string(ClaimBehavior::per_address) == "per_address");
    CHECK(to_string(ClaimBehavior::no_claim) == "no_claim");
    CHECK(to_string(ClaimBehavior::key_sale) == "key_sale");
}
