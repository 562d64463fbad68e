#include "xchain/synthgen.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace xchain {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr uint64_t kFundValue = 1000;       // every funding output
constexpr int64_t kTimeOrigin = 1500000000; // base-chain genesis timestamp
constexpr int64_t kBaseSpan = 1000000;      // seconds covered by a base chain
constexpr uint32_t kTxsPerBlock = 4;
constexpr uint32_t kCoinbaseBatch = 4;      // funded addresses per coinbase
constexpr int64_t kGrantEraSpan = kBaseSpan * 8 / 100;

// mt19937_64's output sequence is pinned by the standard; these helpers
// avoid std distributions, whose draw algorithms are not.
struct Rng {
    std::mt19937_64 eng;
    explicit Rng(uint64_t seed) : eng(seed) {}
    uint64_t below(uint64_t n) { return n == 0 ? 0 : eng() % n; }
    double unit() { return (eng() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return unit() < p; }
};

template <class T>
void shuffle_vec(std::vector<T>& v, Rng& rng) {
    for (size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.below(i)]);
}

enum class AddrType : uint8_t { churn, wallet, claim_dest };

enum class SlotKind : uint8_t { seed_cb, early_cb, late_cb, cospend, fill };

struct Generator {
    const Scenario& sc;
    Rng rng;

    // Global address registry.
    std::vector<std::string> addr_key;
    std::vector<uint32_t> addr_owner;

    size_t n_base = 0;
    uint32_t total_entities = 0;
    std::vector<ClaimBehavior> behavior;
    std::vector<bool> kit;
    std::vector<std::vector<uint32_t>> present;   // chain -> entity ids
    std::vector<std::vector<bool>> is_present;    // chain -> entity flag

    struct Wallet {
        uint32_t owner = 0;
        std::vector<uint32_t> members;
    };
    struct Plan {
        std::vector<Wallet> wallets;       // multi-address wallets (co-spent once)
        std::vector<uint32_t> seed_churn;  // initial spendable pool
        std::vector<uint32_t> early_fund;  // funded before the snapshot
        std::vector<uint32_t> late_fund;   // funded after the snapshot
    };
    std::vector<Plan> plans;
    // layout-time record: entity -> (chain, addr) pairs, for mirroring
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> laid_out;

    struct ChainState {
        ChainSnapshot snap;
        size_t total_planned = 0;
        size_t chain_index = 0;
        bool churn_enabled = true;

        struct AState {
            uint64_t balance = 0;
            AddrType type = AddrType::churn;
        };
        std::unordered_map<uint32_t, AState> st;
        std::vector<uint32_t> created;  // first-credit order
        std::unordered_set<uint32_t> created_set;
        std::vector<uint32_t> appeared;  // any-mention order (the universe)
        std::unordered_set<uint32_t> appeared_set;

        std::vector<std::vector<uint32_t>> avail;  // entity -> spendable churn
        std::vector<uint32_t> entities_with_funds;
        std::vector<bool> in_funds_list;

        std::vector<std::vector<uint32_t>> groups;  // co-spend groups (merged)
        std::unordered_map<uint32_t, uint32_t> group_of;

        std::vector<uint32_t> qualifying;
        uint64_t snapshot_height = 0;
        int64_t boundary_ts = kTimeOrigin;
        bool captured = false;
    };
    std::vector<ChainState> base_states;
    ChainState air_state;

    std::vector<uint32_t> granted;  // grant order
    std::unordered_set<uint32_t> granted_set;
    std::vector<std::vector<uint32_t>> claim_of;  // entity -> claimable grants
    std::vector<KeySale> sales;
    int64_t grant_t_begin = 0;
    int64_t grant_t_end = 0;

    explicit Generator(const Scenario& s) : sc(s), rng(s.seed) {}

    uint32_t new_address(uint32_t owner) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "a%08u", static_cast<unsigned>(addr_key.size()));
        addr_key.emplace_back(buf);
        addr_owner.push_back(owner);
        return static_cast<uint32_t>(addr_key.size() - 1);
    }

    // ---------------------------------------------------------- emission

    void note_appearance(ChainState& cs, uint32_t id) {
        if (cs.appeared_set.insert(id).second)
            cs.appeared.push_back(id);
    }

    void credit(ChainState& cs, uint32_t id, uint64_t v) {
        ChainState::AState& st = cs.st[id];
        bool was_zero = st.balance == 0;
        st.balance += v;
        if (cs.created_set.insert(id).second)
            cs.created.push_back(id);
        if (cs.churn_enabled && st.type == AddrType::churn && was_zero && v > 0) {
            uint32_t owner = addr_owner[id];
            cs.avail[owner].push_back(id);
            if (!cs.in_funds_list[owner]) {
                cs.in_funds_list[owner] = true;
                cs.entities_with_funds.push_back(owner);
            }
        }
    }

    void record_cospend(ChainState& cs, std::vector<uint32_t> ids) {
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        if (ids.size() < 2)
            return;
        // Merge every touched group (and loose address) into the largest.
        int64_t target = -1;
        std::vector<uint32_t> touched;
        for (uint32_t id : ids) {
            auto it = cs.group_of.find(id);
            if (it == cs.group_of.end())
                continue;
            if (std::find(touched.begin(), touched.end(), it->second) == touched.end())
                touched.push_back(it->second);
            if (target < 0 || cs.groups[it->second].size() > cs.groups[target].size())
                target = it->second;
        }
        if (target < 0) {
            target = static_cast<int64_t>(cs.groups.size());
            cs.groups.emplace_back();
        }
        std::vector<uint32_t>& tg = cs.groups[target];
        for (uint32_t g : touched) {
            if (g == target)
                continue;
            for (uint32_t id : cs.groups[g]) {
                cs.group_of[id] = static_cast<uint32_t>(target);
                tg.push_back(id);
            }
            cs.groups[g].clear();
        }
        for (uint32_t id : ids)
            if (!cs.group_of.count(id)) {
                cs.group_of[id] = static_cast<uint32_t>(target);
                tg.push_back(id);
            }
    }

    uint64_t sum_balance(ChainState& cs, const std::vector<uint32_t>& ids) {
        uint64_t v = 0;
        for (uint32_t id : ids)
            v += cs.st[id].balance;
        return v;
    }

    void emit(ChainState& cs, int64_t ts, std::vector<uint32_t> in_ids,
              const std::vector<std::pair<uint32_t, uint64_t>>& outs) {
        size_t idx = cs.snap.txs.size();
        TxRecord tx;
        tx.chain = cs.snap.chain;
        tx.height = idx / kTxsPerBlock;
        tx.timestamp = ts;
        tx.ordinal = idx;
        tx.tx_id = cs.snap.chain + "-t" + std::to_string(idx);
        for (uint32_t id : in_ids) {
            tx.inputs.push_back(addr_key[id]);
            note_appearance(cs, id);
            cs.st[id].balance = 0;
        }
        for (const auto& [id, v] : outs) {
            tx.outputs.push_back({addr_key[id], v});
            note_appearance(cs, id);
            credit(cs, id, v);
        }
        record_cospend(cs, std::move(in_ids));
        cs.snap.txs.push_back(std::move(tx));
    }

    // -------------------------------------------------------------- layout

    void layout() {
        n_base = sc.base_chains.size();

        uint32_t kit_pairs = 0, kit_straddles = 0, kit_timers = 0;
        if (sc.overlap_kit) {
            kit_pairs = n_base >= 2 ? static_cast<uint32_t>(n_base * (n_base - 1) / 2) : 0;
            kit_straddles = n_base >= 2 ? static_cast<uint32_t>(n_base) : 0;
            kit_timers = static_cast<uint32_t>(n_base);
        }
        total_entities = sc.n_entities + kit_pairs + kit_straddles + kit_timers;

        behavior.resize(total_entities);
        kit.assign(total_entities, false);
        laid_out.resize(total_entities);
        is_present.assign(n_base, std::vector<bool>(total_entities, false));
        present.resize(n_base);
        plans.resize(n_base);

        // Behaviors and chain presence for the scenario entities.
        for (uint32_t e = 0; e < sc.n_entities; ++e) {
            double r = rng.unit();
            if (r < sc.claim.sweep_all)
                behavior[e] = ClaimBehavior::sweep_all;
            else if (r < sc.claim.sweep_all + sc.claim.per_address)
                behavior[e] = ClaimBehavior::per_address;
            else if (r < sc.claim.sweep_all + sc.claim.per_address + sc.claim.no_claim)
                behavior[e] = ClaimBehavior::no_claim;
            else
                behavior[e] = ClaimBehavior::key_sale;

            bool anywhere = false;
            for (size_t c = 0; c < n_base; ++c)
                if (rng.chance(sc.chain_presence_prob)) {
                    is_present[c][e] = true;
                    anywhere = true;
                }
            if (!anywhere)
                is_present[e % n_base][e] = true;
        }

        // Wallet layout for scenario entities.
        for (uint32_t e = 0; e < sc.n_entities; ++e) {
            for (size_t c = 0; c < n_base; ++c) {
                if (!is_present[c][e])
                    continue;
                uint32_t n_wallets = 1 + static_cast<uint32_t>(rng.below(sc.max_wallets_per_chain));
                for (uint32_t w = 0; w < n_wallets; ++w) {
                    uint32_t size = rng.chance(sc.multi_address_wallet_prob)
                                        ? 2 + static_cast<uint32_t>(rng.below(sc.max_wallet_size - 1))
                                        : 1;
                    Wallet wallet;
                    wallet.owner = e;
                    for (uint32_t k = 0; k < size; ++k) {
                        uint32_t id = UINT32_MAX;
                        if (rng.chance(sc.cross_chain_reuse_prob)) {
                            // Mirror one of the entity's addresses from
                            // another chain, if any is not yet here.
                            std::vector<uint32_t> cands;
                            for (const auto& [oc, addr] : laid_out[e]) {
                                if (oc == c)
                                    continue;
                                bool here = false;
                                for (const auto& [hc, haddr] : laid_out[e])
                                    if (hc == c && haddr == addr) {
                                        here = true;
                                        break;
                                    }
                                if (!here && std::find(cands.begin(), cands.end(), addr) == cands.end())
                                    cands.push_back(addr);
                            }
                            if (!cands.empty())
                                id = cands[rng.below(cands.size())];
                        }
                        if (id == UINT32_MAX)
                            id = new_address(e);
                        wallet.members.push_back(id);
                        laid_out[e].emplace_back(static_cast<uint32_t>(c), id);
                        plans[c].early_fund.push_back(id);
                    }
                    if (wallet.members.size() >= 2)
                        plans[c].wallets.push_back(std::move(wallet));
                }
            }
        }

        // Overlap kit: deterministic entities that pin the improvement
        // order between the clusterings whatever the random draws did.
        uint32_t next = sc.n_entities;
        if (sc.overlap_kit) {
            // One entity per chain pair: address x recurs on both chains and
            // is co-spent with a chain-local partner on each, so neither
            // chain's clustering can improve the other's.
            for (size_t i = 0; i < n_base; ++i)
                for (size_t j = i + 1; j < n_base; ++j) {
                    uint32_t e = next++;
                    kit[e] = true;
                    behavior[e] = ClaimBehavior::no_claim;
                    is_present[i][e] = is_present[j][e] = true;
                    uint32_t x = new_address(e);
                    uint32_t y = new_address(e);
                    uint32_t z = new_address(e);
                    Wallet wi{e, {x, z}};
                    Wallet wj{e, {x, y}};
                    plans[i].early_fund.push_back(x);
                    plans[i].early_fund.push_back(z);
                    plans[j].early_fund.push_back(x);
                    plans[j].early_fund.push_back(y);
                    plans[i].wallets.push_back(std::move(wi));
                    plans[j].wallets.push_back(std::move(wj));
                    laid_out[e].emplace_back(static_cast<uint32_t>(i), x);
                    laid_out[e].emplace_back(static_cast<uint32_t>(i), z);
                    laid_out[e].emplace_back(static_cast<uint32_t>(j), x);
                    laid_out[e].emplace_back(static_cast<uint32_t>(j), y);
                }
            // One straddle entity per chain: two cold grants on different
            // chains swept together, so no base chain improves the airdrop
            // chain's clustering.
            if (n_base >= 2)
                for (size_t i = 0; i < n_base; ++i) {
                    uint32_t e = next++;
                    kit[e] = true;
                    behavior[e] = ClaimBehavior::sweep_all;
                    size_t j = (i + 1) % n_base;
                    is_present[i][e] = is_present[j][e] = true;
                    uint32_t a = new_address(e);
                    uint32_t b = new_address(e);
                    plans[i].early_fund.push_back(a);
                    plans[j].early_fund.push_back(b);
                    laid_out[e].emplace_back(static_cast<uint32_t>(i), a);
                    laid_out[e].emplace_back(static_cast<uint32_t>(j), b);
                }
            // One timer entity per chain: a granted address co-spent with
            // one funded only after the snapshot, so the airdrop chain's
            // clustering improves no base chain.
            for (size_t i = 0; i < n_base; ++i) {
                uint32_t e = next++;
                kit[e] = true;
                behavior[e] = ClaimBehavior::no_claim;
                is_present[i][e] = true;
                uint32_t p = new_address(e);
                uint32_t q = new_address(e);
                plans[i].early_fund.push_back(p);
                plans[i].late_fund.push_back(q);
                plans[i].wallets.push_back(Wallet{e, {p, q}});
                laid_out[e].emplace_back(static_cast<uint32_t>(i), p);
                laid_out[e].emplace_back(static_cast<uint32_t>(i), q);
            }
        }

        // Seed churn pool and presence lists.
        for (size_t c = 0; c < n_base; ++c) {
            for (uint32_t e = 0; e < total_entities; ++e) {
                if (!is_present[c][e])
                    continue;
                present[c].push_back(e);
                uint32_t n_churn = 1 + static_cast<uint32_t>(rng.below(2));
                for (uint32_t k = 0; k < n_churn; ++k)
                    plans[c].seed_churn.push_back(new_address(e));
            }
        }
    }

    // ------------------------------------------------------- base chains

    void emit_base_chain(size_t ci) {
        Plan& plan = plans[ci];
        ChainState& cs = base_states[ci];
        cs.snap.chain = sc.base_chains[ci];
        cs.chain_index = ci;
        cs.avail.resize(total_entities);
        cs.in_funds_list.assign(total_entities, false);

        for (uint32_t id : plan.early_fund)
            cs.st[id].type = AddrType::wallet;
        for (uint32_t id : plan.late_fund)
            cs.st[id].type = AddrType::wallet;

        auto batches = [](size_t n) { return (n + kCoinbaseBatch - 1) / kCoinbaseBatch; };
        const size_t seed_cb = batches(plan.seed_churn.size());
        const size_t early_cb = batches(plan.early_fund.size());
        const size_t late_cb = batches(plan.late_fund.size());
        const size_t cospends = plan.wallets.size();
        const size_t structural_pre = seed_cb + early_cb;
        const size_t structural_post = late_cb + cospends;

        size_t total = std::max<size_t>(sc.chain_budget(ci),
                                        structural_pre + structural_post + 8);
        cs.total_planned = total;

        // First post-snapshot slot.  Kept on a block edge so that "balance
        // after every tx of height <= snapshot_height" is exactly the
        // captured qualifying set.
        auto align_up = [](size_t x) {
            return (x + kTxsPerBlock - 1) / kTxsPerBlock * kTxsPerBlock;
        };
        auto align_down = [](size_t x) { return x / kTxsPerBlock * kTxsPerBlock; };
        const size_t lo = align_up(std::max<size_t>(structural_pre, kTxsPerBlock));
        const size_t hi = align_down(total - structural_post);
        size_t boundary;
        auto height_it = sc.airdrop.snapshot_heights.find(sc.base_chains[ci]);
        if (height_it != sc.airdrop.snapshot_heights.end())
            boundary = static_cast<size_t>((height_it->second + 1) * kTxsPerBlock);
        else
            boundary = align_down(static_cast<size_t>(std::llround(
                                      sc.airdrop.snapshot_fraction *
                                      static_cast<double>(total))) +
                                  kTxsPerBlock / 2);
        boundary = std::clamp(boundary, lo, hi);

        std::vector<SlotKind> kinds;
        kinds.reserve(total);
        kinds.insert(kinds.end(), seed_cb, SlotKind::seed_cb);
        kinds.insert(kinds.end(), early_cb, SlotKind::early_cb);
        kinds.insert(kinds.end(), boundary - structural_pre, SlotKind::fill);
        kinds.insert(kinds.end(), late_cb, SlotKind::late_cb);
        std::vector<SlotKind> mixed;
        mixed.insert(mixed.end(), cospends, SlotKind::cospend);
        mixed.insert(mixed.end(), total - boundary - structural_post, SlotKind::fill);
        shuffle_vec(mixed, rng);
        kinds.insert(kinds.end(), mixed.begin(), mixed.end());

        auto ts = [&](size_t idx) {
            return kTimeOrigin + static_cast<int64_t>(ci) +
                   static_cast<int64_t>(idx) * kBaseSpan / static_cast<int64_t>(total);
        };

        size_t seed_next = 0, early_next = 0, late_next = 0, wallet_next = 0;
        for (size_t idx = 0; idx < total; ++idx) {
            if (idx == boundary)
                capture_snapshot(cs, boundary, ts);
            switch (kinds[idx]) {
                case SlotKind::seed_cb:
                    emit_coinbase(cs, ts(idx), plan.seed_churn, seed_next);
                    break;
                case SlotKind::early_cb:
                    emit_coinbase(cs, ts(idx), plan.early_fund, early_next);
                    break;
                case SlotKind::late_cb:
                    emit_coinbase(cs, ts(idx), plan.late_fund, late_next);
                    break;
                case SlotKind::cospend:
                    emit_cospend(cs, ts(idx), plan.wallets[wallet_next++]);
                    break;
                case SlotKind::fill:
                    emit_filler(cs, ci, ts(idx));
                    break;
            }
        }
        if (!cs.captured)
            capture_snapshot(cs, total, ts);
    }

    template <class TsFn>
    void capture_snapshot(ChainState& cs, size_t boundary, TsFn ts) {
        cs.captured = true;
        cs.snapshot_height = boundary == 0 ? 0 : (boundary - 1) / kTxsPerBlock;
        cs.boundary_ts = ts(boundary == 0 ? 0 : boundary - 1);
        for (uint32_t id : cs.created)
            if (cs.st[id].balance >= sc.airdrop.dust_threshold)
                cs.qualifying.push_back(id);
    }

    void emit_coinbase(ChainState& cs, int64_t ts, const std::vector<uint32_t>& queue,
                       size_t& next) {
        std::vector<std::pair<uint32_t, uint64_t>> outs;
        for (uint32_t k = 0; k < kCoinbaseBatch && next < queue.size(); ++k, ++next)
            outs.emplace_back(queue[next], kFundValue);
        if (outs.empty())  // queue exhausted; keep the slot as a no-op mint
            outs.emplace_back(new_address(present_entity(cs.chain_index)), kFundValue);
        emit(cs, ts, {}, outs);
    }

    uint32_t present_entity(size_t ci) {
        const std::vector<uint32_t>& p = present[ci];
        return p[rng.below(p.size())];
    }

    void emit_cospend(ChainState& cs, int64_t ts, const Wallet& w) {
        std::vector<uint32_t> ids = w.members;
        shuffle_vec(ids, rng);
        uint64_t v = sum_balance(cs, ids);
        uint32_t dest = new_address(w.owner);
        emit(cs, ts, std::move(ids), {{dest, v}});
    }

    void emit_filler(ChainState& cs, size_t ci, int64_t ts) {
        auto picked = pick_churn(cs);
        if (!picked) {
            // Pool dried up (everything parked in wallets): mint a fresh one.
            uint32_t id = new_address(present_entity(ci));
            emit(cs, ts, {}, {{id, kFundValue}});
            return;
        }
        auto [e, a] = *picked;
        std::vector<uint32_t> ids{a};
        if (rng.chance(sc.churn_pair_spend_prob) && !cs.avail[e].empty()) {
            size_t j = rng.below(cs.avail[e].size());
            ids.push_back(cs.avail[e][j]);
            cs.avail[e][j] = cs.avail[e].back();
            cs.avail[e].pop_back();
        }
        uint64_t v = sum_balance(cs, ids);
        uint32_t target;
        if (rng.chance(sc.address_reuse_prob) && !cs.created.empty())
            target = cs.created[rng.below(cs.created.size())];
        else
            target = new_address(present_entity(ci));
        emit(cs, ts, std::move(ids), {{target, v}});
    }

    std::optional<std::pair<uint32_t, uint32_t>> pick_churn(ChainState& cs) {
        while (!cs.entities_with_funds.empty()) {
            size_t i = rng.below(cs.entities_with_funds.size());
            uint32_t e = cs.entities_with_funds[i];
            if (cs.avail[e].empty()) {
                cs.in_funds_list[e] = false;
                cs.entities_with_funds[i] = cs.entities_with_funds.back();
                cs.entities_with_funds.pop_back();
                continue;
            }
            size_t j = rng.below(cs.avail[e].size());
            uint32_t id = cs.avail[e][j];
            cs.avail[e][j] = cs.avail[e].back();
            cs.avail[e].pop_back();
            return std::make_pair(e, id);
        }
        return std::nullopt;
    }

    // ------------------------------------------------------ airdrop chain

    void emit_airdrop() {
        ChainState& cs = air_state;
        cs.snap.chain = sc.airdrop.chain;
        cs.churn_enabled = false;
        cs.avail.resize(total_entities);
        cs.in_funds_list.assign(total_entities, false);

        // Grants: union of per-chain qualifying sets, first chain wins.
        for (size_t c = 0; c < n_base; ++c)
            for (uint32_t id : base_states[c].qualifying)
                if (granted_set.insert(id).second)
                    granted.push_back(id);

        int64_t t_air = kTimeOrigin;
        for (const ChainState& bs : base_states)
            t_air = std::max(t_air, bs.boundary_ts);
        t_air += 1000;

        const size_t per_tx = sc.airdrop.grants_per_tx;
        const size_t n_grant_txs = (granted.size() + per_tx - 1) / per_tx;
        const int64_t spacing =
            std::max<int64_t>(1, kGrantEraSpan / std::max<size_t>(1, n_grant_txs));

        grant_t_begin = t_air;
        grant_t_end = t_air;
        size_t next = 0;
        for (size_t g = 0; g < n_grant_txs; ++g) {
            std::vector<std::pair<uint32_t, uint64_t>> outs;
            for (size_t k = 0; k < per_tx && next < granted.size(); ++k, ++next)
                outs.emplace_back(granted[next], sc.airdrop.grant_value);
            int64_t ts = t_air + static_cast<int64_t>(g) * spacing;
            grant_t_end = ts;
            emit(cs, ts, {}, outs);
        }

        // Claimable grants per entity, then key sales move control.
        claim_of.resize(total_entities);
        for (uint32_t id : granted)
            claim_of[addr_owner[id]].push_back(id);
        arrange_key_sales();

        int64_t t_claim = grant_t_end + 500;
        for (uint32_t e = 0; e < total_entities; ++e) {
            std::vector<uint32_t>& list = claim_of[e];
            if (list.empty())
                continue;
            switch (behavior[e]) {
                case ClaimBehavior::sweep_all:
                case ClaimBehavior::key_sale: {  // seller sweeps what remains
                    uint32_t dest = new_address(e);
                    cs.st[dest].type = AddrType::claim_dest;
                    uint64_t v = sum_balance(cs, list);
                    emit(cs, t_claim, list, {{dest, v}});
                    t_claim += 3;
                    break;
                }
                case ClaimBehavior::per_address:
                    for (uint32_t id : list) {
                        uint32_t dest = new_address(e);
                        cs.st[dest].type = AddrType::claim_dest;
                        emit(cs, t_claim, {id}, {{dest, cs.st[id].balance}});
                        t_claim += 3;
                    }
                    break;
                case ClaimBehavior::no_claim:
                    break;
            }
        }
    }

    void arrange_key_sales() {
        for (uint32_t e = 0; e < total_entities; ++e) {
            if (kit[e] || behavior[e] != ClaimBehavior::key_sale)
                continue;
            if (try_key_sale(e))
                continue;
            behavior[e] = ClaimBehavior::sweep_all;  // no viable counterparty
        }
    }

    // A sale needs: a wallet of the seller with >= 2 granted members (one is
    // sold, one stays), another granted seller address on the same chain,
    // and a sweeping buyer granted on that chain.  Both resulting claim
    // clusters then reach the wallet's cluster plus one more: a non-star.
    bool try_key_sale(uint32_t e) {
        for (size_t c = 0; c < n_base; ++c) {
            ChainState& cs = base_states[c];
            for (const Wallet& w : plans[c].wallets) {
                if (w.owner != e)
                    continue;
                std::vector<uint32_t> granted_members;
                for (uint32_t m : w.members)
                    if (granted_set.count(m))
                        granted_members.push_back(m);
                if (granted_members.size() < 2)
                    continue;
                bool extra = false;
                for (uint32_t id : claim_of[e]) {
                    if (!cs.created_set.count(id))
                        continue;
                    if (std::find(w.members.begin(), w.members.end(), id) == w.members.end()) {
                        extra = true;
                        break;
                    }
                }
                if (!extra)
                    continue;
                for (uint32_t step = 1; step < total_entities; ++step) {
                    uint32_t f = (e + step) % total_entities;
                    if (kit[f] || behavior[f] != ClaimBehavior::sweep_all)
                        continue;
                    bool buyer_on_chain = false;
                    for (uint32_t id : claim_of[f])
                        if (cs.created_set.count(id)) {
                            buyer_on_chain = true;
                            break;
                        }
                    if (!buyer_on_chain)
                        continue;
                    uint32_t sold = granted_members.front();
                    claim_of[e].erase(
                        std::find(claim_of[e].begin(), claim_of[e].end(), sold));
                    claim_of[f].push_back(sold);
                    sales.push_back({e, f, addr_key[sold], sc.base_chains[c]});
                    return true;
                }
            }
        }
        return false;
    }

    // ------------------------------------------------------------- result

    GenerationResult finish() {
        GenerationResult out;
        GroundTruth& gt = out.truth;
        gt.base_chains = sc.base_chains;
        gt.airdrop_chain = sc.airdrop.chain;
        gt.grant_time_begin = grant_t_begin;
        gt.grant_time_end = grant_t_end;
        gt.behaviors = behavior;
        gt.key_sales = sales;
        gt.entity_addresses.resize(total_entities);

        auto absorb = [&](ChainState& cs) {
            const ChainId& chain = cs.snap.chain;
            std::vector<AddressKey>& seen = gt.appearances[chain];
            for (uint32_t id : cs.appeared) {
                seen.push_back(addr_key[id]);
                gt.entity_addresses[addr_owner[id]][chain].push_back(addr_key[id]);
            }
            std::vector<std::vector<AddressKey>>& groups = gt.cospend_groups[chain];
            for (const std::vector<uint32_t>& g : cs.groups) {
                if (g.size() < 2)
                    continue;
                std::vector<AddressKey> keys;
                keys.reserve(g.size());
                for (uint32_t id : g)
                    keys.push_back(addr_key[id]);
                std::sort(keys.begin(), keys.end());
                groups.push_back(std::move(keys));
            }
        };

        for (size_t c = 0; c < n_base; ++c) {
            ChainState& cs = base_states[c];
            absorb(cs);
            gt.snapshot_heights[cs.snap.chain] = cs.snapshot_height;
            std::vector<AddressKey>& q = gt.qualifying[cs.snap.chain];
            for (uint32_t id : cs.qualifying)
                q.push_back(addr_key[id]);
            out.snapshots.push_back(std::move(cs.snap));
        }
        absorb(air_state);
        out.snapshots.push_back(std::move(air_state.snap));

        for (uint32_t id : granted)
            gt.granted.push_back(addr_key[id]);

        for (const ChainId& chain : gt.base_chains)
            gt.expected[chain] = expected_impact(gt, gt.airdrop_chain, chain);
        return out;
    }
};

// --------------------------------------------------------- scenario JSON

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return it.key() == k;
            }) == allowed.end())
            throw std::invalid_argument("scenario: unknown key \"" + it.key() + "\" in " +
                                        where);
}

double get_prob(const json& j, const char* key, double def) {
    if (!j.contains(key))
        return def;
    if (!j[key].is_number())
        throw std::invalid_argument(std::string("scenario: \"") + key + "\" must be a number");
    return j[key].get<double>();
}

}  // namespace

std::string_view to_string(ClaimBehavior b) {
    switch (b) {
        case ClaimBehavior::sweep_all: return "sweep_all";
        case ClaimBehavior::per_address: return "per_address";
        case ClaimBehavior::no_claim: return "no_claim";
        case ClaimBehavior::key_sale: return "key_sale";
    }
    return "unknown";
}

void Scenario::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument(std::string("scenario: ") + name +
                                        " must lie in [0, 1]");
    };
    if (n_entities == 0)
        throw std::invalid_argument("scenario: n_entities must be positive");
    if (base_chains.empty() || base_chains.size() > 16)
        throw std::invalid_argument("scenario: between 1 and 16 base chains");
    for (size_t i = 0; i < base_chains.size(); ++i) {
        if (base_chains[i].empty())
            throw std::invalid_argument("scenario: empty chain id");
        for (size_t j = i + 1; j < base_chains.size(); ++j)
            if (base_chains[i] == base_chains[j])
                throw std::invalid_argument("scenario: duplicate chain id: " + base_chains[i]);
    }
    if (airdrop.chain.empty())
        throw std::invalid_argument("scenario: empty airdrop chain id");
    for (const ChainId& c : base_chains)
        if (c == airdrop.chain)
            throw std::invalid_argument("scenario: airdrop chain collides with base chain: " + c);
    for (const auto& [chain, budget] : txs_per_chain) {
        if (std::find(base_chains.begin(), base_chains.end(), chain) == base_chains.end())
            throw std::invalid_argument("scenario: txs_per_chain names unknown chain: " + chain);
        (void)budget;
    }
    for (const auto& [chain, h] : airdrop.snapshot_heights) {
        if (std::find(base_chains.begin(), base_chains.end(), chain) == base_chains.end())
            throw std::invalid_argument("scenario: snapshot_heights names unknown chain: " +
                                        chain);
        (void)h;
    }
    prob(address_reuse_prob, "address_reuse_prob");
    prob(cross_chain_reuse_prob, "cross_chain_reuse_prob");
    prob(multi_address_wallet_prob, "multi_address_wallet_prob");
    prob(chain_presence_prob, "chain_presence_prob");
    prob(churn_pair_spend_prob, "churn_pair_spend_prob");
    prob(claim.sweep_all, "claim_mix.sweep_all");
    prob(claim.per_address, "claim_mix.per_address");
    prob(claim.no_claim, "claim_mix.no_claim");
    prob(claim.key_sale, "claim_mix.key_sale");
    double sum = claim.sweep_all + claim.per_address + claim.no_claim + claim.key_sale;
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("scenario: claim_mix must sum to 1");
    if (!(airdrop.snapshot_fraction > 0.0 && airdrop.snapshot_fraction < 1.0))
        throw std::invalid_argument("scenario: snapshot_fraction must lie in (0, 1)");
    if (max_wallet_size < 2)
        throw std::invalid_argument("scenario: max_wallet_size must be at least 2");
    if (max_wallets_per_chain < 1)
        throw std::invalid_argument("scenario: max_wallets_per_chain must be at least 1");
    if (airdrop.grants_per_tx < 1)
        throw std::invalid_argument("scenario: grants_per_tx must be at least 1");
    if (airdrop.grant_value < 1)
        throw std::invalid_argument("scenario: grant_value must be at least 1");
}

uint32_t Scenario::chain_budget(size_t chain_index) const {
    auto it = txs_per_chain.find(base_chains.at(chain_index));
    if (it != txs_per_chain.end())
        return it->second;
    static const uint32_t defaults[] = {2600, 1800, 1400};
    return chain_index < 3 ? defaults[chain_index] : 1200;
}

Scenario scenario_from_json(std::istream& in, const std::string& origin) {
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw std::invalid_argument("scenario: " + origin + " is not a JSON object");
    check_keys(j,
               {"seed", "n_entities", "base_chains", "txs_per_chain", "address_reuse_prob",
                "cross_chain_reuse_prob", "multi_address_wallet_prob", "max_wallets_per_chain",
                "max_wallet_size", "chain_presence_prob", "churn_pair_spend_prob", "claim_mix",
                "airdrop", "overlap_kit"},
               origin);

    Scenario s;
    if (j.contains("seed"))
        s.seed = j["seed"].get<uint64_t>();
    if (j.contains("n_entities"))
        s.n_entities = j["n_entities"].get<uint32_t>();
    if (j.contains("base_chains"))
        s.base_chains = j["base_chains"].get<std::vector<std::string>>();
    if (j.contains("txs_per_chain"))
        s.txs_per_chain = j["txs_per_chain"].get<std::map<std::string, uint32_t>>();
    s.address_reuse_prob = get_prob(j, "address_reuse_prob", s.address_reuse_prob);
    s.cross_chain_reuse_prob = get_prob(j, "cross_chain_reuse_prob", s.cross_chain_reuse_prob);
    s.multi_address_wallet_prob =
        get_prob(j, "multi_address_wallet_prob", s.multi_address_wallet_prob);
    if (j.contains("max_wallets_per_chain"))
        s.max_wallets_per_chain = j["max_wallets_per_chain"].get<uint32_t>();
    if (j.contains("max_wallet_size"))
        s.max_wallet_size = j["max_wallet_size"].get<uint32_t>();
    s.chain_presence_prob = get_prob(j, "chain_presence_prob", s.chain_presence_prob);
    s.churn_pair_spend_prob = get_prob(j, "churn_pair_spend_prob", s.churn_pair_spend_prob);
    if (j.contains("claim_mix")) {
        const json& cm = j["claim_mix"];
        check_keys(cm, {"sweep_all", "per_address", "no_claim", "key_sale"}, "claim_mix");
        s.claim.sweep_all = get_prob(cm, "sweep_all", s.claim.sweep_all);
        s.claim.per_address = get_prob(cm, "per_address", s.claim.per_address);
        s.claim.no_claim = get_prob(cm, "no_claim", s.claim.no_claim);
        s.claim.key_sale = get_prob(cm, "key_sale", s.claim.key_sale);
    }
    if (j.contains("airdrop")) {
        const json& a = j["airdrop"];
        check_keys(a,
                   {"chain", "grant_value", "dust_threshold", "snapshot_fraction",
                    "snapshot_heights", "grants_per_tx"},
                   "airdrop");
        if (a.contains("chain"))
            s.airdrop.chain = a["chain"].get<std::string>();
        if (a.contains("grant_value"))
            s.airdrop.grant_value = a["grant_value"].get<uint64_t>();
        if (a.contains("dust_threshold"))
            s.airdrop.dust_threshold = a["dust_threshold"].get<uint64_t>();
        s.airdrop.snapshot_fraction =
            get_prob(a, "snapshot_fraction", s.airdrop.snapshot_fraction);
        if (a.contains("snapshot_heights"))
            s.airdrop.snapshot_heights =
                a["snapshot_heights"].get<std::map<std::string, uint64_t>>();
        if (a.contains("grants_per_tx"))
            s.airdrop.grants_per_tx = a["grants_per_tx"].get<uint32_t>();
    }
    if (j.contains("overlap_kit"))
        s.overlap_kit = j["overlap_kit"].get<bool>();
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open scenario file: " + path);
    return scenario_from_json(in, path);
}

void scenario_to_json(const Scenario& s, std::ostream& out) {
    ordered_json j;
    j["seed"] = s.seed;
    j["n_entities"] = s.n_entities;
    j["base_chains"] = s.base_chains;
    j["txs_per_chain"] = s.txs_per_chain;
    j["address_reuse_prob"] = s.address_reuse_prob;
    j["cross_chain_reuse_prob"] = s.cross_chain_reuse_prob;
    j["multi_address_wallet_prob"] = s.multi_address_wallet_prob;
    j["max_wallets_per_chain"] = s.max_wallets_per_chain;
    j["max_wallet_size"] = s.max_wallet_size;
    j["chain_presence_prob"] = s.chain_presence_prob;
    j["churn_pair_spend_prob"] = s.churn_pair_spend_prob;
    j["claim_mix"] = {{"sweep_all", s.claim.sweep_all},
                      {"per_address", s.claim.per_address},
                      {"no_claim", s.claim.no_claim},
                      {"key_sale", s.claim.key_sale}};
    j["airdrop"] = {{"chain", s.airdrop.chain},
                    {"grant_value", s.airdrop.grant_value},
                    {"dust_threshold", s.airdrop.dust_threshold},
                    {"snapshot_fraction", s.airdrop.snapshot_fraction},
                    {"snapshot_heights", s.airdrop.snapshot_heights},
                    {"grants_per_tx", s.airdrop.grants_per_tx}};
    j["overlap_kit"] = s.overlap_kit;
    out << j.dump(2) << '\n';
}

// --------------------------------------------------------- ground truth

ExpectedImpact expected_impact(const GroundTruth& gt, const ChainId& source,
                               const ChainId& target) {
    if (source == target)
        throw std::invalid_argument("expected_impact needs two distinct chains");

    static const std::vector<std::vector<AddressKey>> no_groups;
    static const std::vector<AddressKey> no_addrs;
    auto groups_of = [&](const ChainId& c) -> const std::vector<std::vector<AddressKey>>& {
        auto it = gt.cospend_groups.find(c);
        return it == gt.cospend_groups.end() ? no_groups : it->second;
    };
    auto appearances_of = [&](const ChainId& c) -> const std::vector<AddressKey>& {
        auto it = gt.appearances.find(c);
        return it == gt.appearances.end() ? no_addrs : it->second;
    };

    // Target cluster ids: group index, or |groups| + appearance index for
    // addresses the target chain saw but never co-spent.
    const auto& tgroups = groups_of(target);
    std::unordered_map<std::string_view, uint64_t> cluster_id;
    for (uint64_t g = 0; g < tgroups.size(); ++g)
        for (const AddressKey& a : tgroups[g])
            cluster_id.emplace(a, g);
    uint64_t next_singleton = tgroups.size();
    for (const AddressKey& a : appearances_of(target))
        cluster_id.emplace(a, next_singleton++);
    std::unordered_set<std::string_view> on_target;
    for (const AddressKey& a : appearances_of(target))
        on_target.insert(a);

    // Union impacting sources' target clusters; a component is one root.
    std::unordered_map<uint64_t, uint64_t> parent;
    auto find = [&](uint64_t x) {
        while (true) {
            auto it = parent.find(x);
            if (it == parent.end() || it->second == x)
                return x;
            auto up = parent.find(it->second);
            if (up != parent.end())
                it->second = up->second;
            x = parent[x];
        }
    };

    ExpectedImpact ei;
    std::unordered_set<uint64_t> impacted;
    std::vector<std::vector<uint64_t>> impacting;  // target sets per source
    for (const std::vector<AddressKey>& s : groups_of(source)) {
        std::vector<uint64_t> touched;
        for (const AddressKey& a : s) {
            if (!on_target.count(a))
                continue;
            uint64_t t = cluster_id.at(a);
            if (std::find(touched.begin(), touched.end(), t) == touched.end())
                touched.push_back(t);
        }
        if (touched.size() < 2)
            continue;
        for (uint64_t t : touched) {
            impacted.insert(t);
            parent.try_emplace(t, t);
        }
        for (size_t i = 1; i < touched.size(); ++i) {
            uint64_t ra = find(touched[0]);
            uint64_t rb = find(touched[i]);
            if (ra != rb)
                parent[rb] = ra;
        }
        impacting.push_back(std::move(touched));
    }

    std::unordered_map<uint64_t, uint64_t> sources_per_root;
    for (const std::vector<uint64_t>& touched : impacting)
        ++sources_per_root[find(touched.front())];

    ei.component_count = sources_per_root.size();
    ei.impacted_clusters = impacted.size();
    for (const auto& [root, n] : sources_per_root)
        if (n == 1)
            ++ei.stars;
    ei.non_stars = ei.component_count - ei.stars;
    return ei;
}

GenerationResult generate(const Scenario& s) {
    s.validate();
    Generator g(s);
    g.base_states.resize(s.base_chains.size());
    g.layout();
    for (size_t c = 0; c < s.base_chains.size(); ++c)
        g.emit_base_chain(c);
    g.emit_airdrop();
    return g.finish();
}

void ground_truth_to_json(const GroundTruth& gt, std::ostream& out) {
    ordered_json j;
    j["base_chains"] = gt.base_chains;
    j["airdrop_chain"] = gt.airdrop_chain;
    j["snapshot_heights"] = gt.snapshot_heights;
    j["grant_era"] = {{"t_begin", gt.grant_time_begin}, {"t_end", gt.grant_time_end}};

    j["entities"] = ordered_json::array();
    for (size_t e = 0; e < gt.entity_addresses.size(); ++e) {
        ordered_json je;
        je["behavior"] = to_string(gt.behaviors[e]);
        je["addresses"] = gt.entity_addresses[e];
        j["entities"].push_back(std::move(je));
    }
    j["key_sales"] = ordered_json::array();
    for (const KeySale& ks : gt.key_sales)
        j["key_sales"].push_back({{"seller", ks.seller},
                                  {"buyer", ks.buyer},
                                  {"address", ks.address},
                                  {"chain", ks.chain}});
    j["qualifying"] = gt.qualifying;
    j["granted"] = gt.granted;
    j["cospend_groups"] = gt.cospend_groups;
    j["appearances"] = gt.appearances;
    j["expected_impact"] = ordered_json::object();
    for (const auto& [chain, ei] : gt.expected)
        j["expected_impact"][chain] = {{"component_count", ei.component_count},
                                       {"impacted_clusters", ei.impacted_clusters},
                                       {"stars", ei.stars},
                                       {"non_stars", ei.non_stars}};
    out << j.dump(2) << '\n';
}

}  // namespace xchain
