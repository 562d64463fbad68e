// Deterministic synthetic multi-chain generator with ground truth.
//
// A scenario lays out entities owning wallets (intended co-spend groups)
// across several base chains, replays funding and churn activity, then
// snapshots per-chain balances at a configurable height and emits an
// airdrop chain granting a fixed value to every address holding a
// qualifying balance.  Entities claim their grants according to a
// behavior mix: sweep everything in one spend, claim each address
// separately, never claim, or sell one key to another entity (whose sweep
// then bridges two entities' clusters -- the non-star case).
//
// Everything is a pure function of the scenario, so one seed yields
// byte-identical chain files, and the ground truth predicts exactly what
// the clustering pipeline will measure.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "xchain/chain_model.hpp"

namespace xchain {

struct ClaimMix {
    double sweep_all = 0.4;
    double per_address = 0.3;
    double no_claim = 0.25;
    double key_sale = 0.05;
};

struct AirdropConfig {
    ChainId chain = "clamlike";
    uint64_t grant_value = 46;
    uint64_t dust_threshold = 1;      // minimum qualifying balance
    double snapshot_fraction = 0.55;  // position of the snapshot along each base chain
    std::map<ChainId, uint64_t> snapshot_heights;  // explicit per-chain override
    uint32_t grants_per_tx = 8;
};

struct Scenario {
    uint64_t seed = 1;
    uint32_t n_entities = 200;
    std::vector<ChainId> base_chains = {"btclike", "ltclike", "dogelike"};
    std::map<ChainId, uint32_t> txs_per_chain;  // activity budget; defaults applied
    double address_reuse_prob = 0.08;      // churn pays an already-known address
    double cross_chain_reuse_prob = 0.04;  // wallet mirrors an own address elsewhere
    double multi_address_wallet_prob = 0.5;
    uint32_t max_wallets_per_chain = 3;
    uint32_t max_wallet_size = 4;
    double chain_presence_prob = 0.7;     // entity is active on a given base chain
    double churn_pair_spend_prob = 0.15;  // churn spend uses two addresses
    ClaimMix claim;
    AirdropConfig airdrop;
    // Adds a few fixed entities whose spends guarantee that no base chain's
    // clustering improves another's and that the airdrop chain and each
    // base chain stay incomparable, whatever the random draws do.
    bool overlap_kit = true;

    void validate() const;  // throws std::invalid_argument
    uint32_t chain_budget(size_t chain_index) const;
};

Scenario scenario_from_json(std::istream& in, const std::string& origin = "<scenario>");
Scenario load_scenario(const std::string& path);
void scenario_to_json(const Scenario& s, std::ostream& out);

enum class ClaimBehavior { sweep_all, per_address, no_claim, key_sale };
std::string_view to_string(ClaimBehavior b);

struct KeySale {
    uint32_t seller = 0;
    uint32_t buyer = 0;
    AddressKey address;
    ChainId chain;  // where the sold address held its clusters
};

struct ExpectedImpact {
    uint64_t component_count = 0;
    uint64_t impacted_clusters = 0;
    uint64_t stars = 0;
    uint64_t non_stars = 0;

    bool operator==(const ExpectedImpact&) const = default;
};

struct GroundTruth {
    std::vector<ChainId> base_chains;
    ChainId airdrop_chain;
    std::map<ChainId, uint64_t> snapshot_heights;  // as realized
    int64_t grant_time_begin = 0;  // grant era: [first, last] grant timestamp
    int64_t grant_time_end = 0;

    // entity id -> chain -> addresses it created there (creation order)
    std::vector<std::map<ChainId, std::vector<AddressKey>>> entity_addresses;
    std::vector<ClaimBehavior> behaviors;  // effective behavior per entity
    std::vector<KeySale> key_sales;

    // chain -> every address appearing there, first-appearance order
    std::map<ChainId, std::vector<AddressKey>> appearances;
    // chain -> multi-address co-spend groups the emission created there
    std::map<ChainId, std::vector<std::vector<AddressKey>>> cospend_groups;

    std::map<ChainId, std::vector<AddressKey>> qualifying;  // per base chain
    std::vector<AddressKey> granted;                        // grant order, deduped

    // source = airdrop chain, one entry per base chain
    std::map<ChainId, ExpectedImpact> expected;
};

// Predicts the impacted-subgraph measurement for source -> target from the
// ground truth alone: sources are the co-spend groups on `source`, target
// clusters come from groups on `target` with unlisted addresses trivial.
ExpectedImpact expected_impact(const GroundTruth& gt, const ChainId& source,
                               const ChainId& target);

struct GenerationResult {
    std::vector<ChainSnapshot> snapshots;  // base chains in order, then airdrop
    GroundTruth truth;
};

GenerationResult generate(const Scenario& s);

void ground_truth_to_json(const GroundTruth& gt, std::ostream& out);

}  // namespace xchain
