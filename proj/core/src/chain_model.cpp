#include "xchain/chain_model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace xchain {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& origin, size_t line, const std::string& msg) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << msg;
    throw ParseError(os.str(), line);
}

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

TxRecord parse_tx_line(const json& j, const ChainId& chain, const std::string& origin,
                       size_t line) {
    if (!j.is_object())
        fail(origin, line, "expected a JSON object");
    static const char* required[] = {"tx", "h", "t", "in", "out"};
    for (const char* key : required)
        if (!j.contains(key))
            fail(origin, line, std::string("missing key \"") + key + "\"");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find_if(std::begin(required), std::end(required),
                         [&](const char* k) { return it.key() == k; }) == std::end(required))
            fail(origin, line, "unexpected key \"" + it.key() + "\"");

    TxRecord tx;
    tx.chain = chain;

    const json& jtx = j["tx"];
    if (!jtx.is_string() || jtx.get_ref<const std::string&>().empty())
        fail(origin, line, "\"tx\" must be a non-empty string");
    tx.tx_id = jtx.get<std::string>();

    const json& jh = j["h"];
    if (!jh.is_number_unsigned())
        fail(origin, line, "\"h\" must be a non-negative integer");
    tx.height = jh.get<uint64_t>();

    const json& jt = j["t"];
    if (!jt.is_number_integer())
        fail(origin, line, "\"t\" must be an integer");
    tx.timestamp = jt.get<int64_t>();

    const json& jin = j["in"];
    if (!jin.is_array())
        fail(origin, line, "\"in\" must be an array");
    for (const json& e : jin) {
        if (!e.is_string() || e.get_ref<const std::string&>().empty())
            fail(origin, line, "input addresses must be non-empty strings");
        tx.inputs.push_back(e.get<std::string>());
    }

    const json& jout = j["out"];
    if (!jout.is_array() || jout.empty())
        fail(origin, line, "\"out\" must be a non-empty array");
    for (const json& e : jout) {
        if (!e.is_object())
            fail(origin, line, "outputs must be objects");
        OutputRecord out;
        for (auto it = e.begin(); it != e.end(); ++it)
            if (it.key() != "a" && it.key() != "v")
                fail(origin, line, "unexpected output key \"" + it.key() + "\"");
        if (e.contains("a")) {
            const json& ja = e["a"];
            if (!ja.is_string() || ja.get_ref<const std::string&>().empty())
                fail(origin, line, "output \"a\" must be a non-empty string");
            out.address = ja.get<std::string>();
        }
        if (!e.contains("v") || !e["v"].is_number_unsigned())
            fail(origin, line, "output \"v\" must be a non-negative integer");
        out.value = e["v"].get<uint64_t>();
        tx.outputs.push_back(std::move(out));
    }
    return tx;
}

}  // namespace

ChainSnapshot parse_chain_stream(std::istream& in, const ChainId& chain,
                                 const std::string& origin,
                                 std::vector<std::string>* warnings) {
    ChainSnapshot snap;
    snap.chain = chain;

    std::unordered_set<std::string> tx_ids;
    std::unordered_set<std::string> seen_outputs;   // addresses funded so far
    std::unordered_set<std::string> warned_inputs;  // one warning per address
    uint64_t last_height = 0;

    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || is_blank(line))
            fail(origin, line_no, "blank line");

        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            fail(origin, line_no, "not valid JSON");

        TxRecord tx = parse_tx_line(j, chain, origin, line_no);
        tx.ordinal = snap.txs.size();

        if (!tx_ids.insert(tx.tx_id).second)
            fail(origin, line_no, "duplicate tx id \"" + tx.tx_id + "\"");
        if (!snap.txs.empty() && tx.height < last_height)
            fail(origin, line_no, "height decreases");
        last_height = tx.height;

        // Inputs must reference earlier outputs; a miss is legal (the file
        // may start mid-history) but worth flagging.
        if (warnings) {
            for (const AddressKey& a : tx.inputs)
                if (!seen_outputs.count(a) && warned_inputs.insert(a).second) {
                    std::ostringstream os;
                    os << origin << ":" << line_no << ": input address \"" << a
                       << "\" not seen in any earlier output";
                    warnings->push_back(os.str());
                }
        }
        for (const OutputRecord& out : tx.outputs)
            if (out.address)
                seen_outputs.insert(*out.address);

        snap.txs.push_back(std::move(tx));
    }
    return snap;
}

ChainSnapshot parse_chain_file(const std::string& path, const ChainId& chain,
                               std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open chain file: " + path);
    return parse_chain_stream(in, chain, path, warnings);
}

void write_chain_stream(const ChainSnapshot& snap, std::ostream& out) {
    for (const TxRecord& tx : snap.txs) {
        ordered_json j;
        j["tx"] = tx.tx_id;
        j["h"] = tx.height;
        j["t"] = tx.timestamp;
        j["in"] = tx.inputs;
        ordered_json outs = ordered_json::array();
        for (const OutputRecord& o : tx.outputs) {
            ordered_json jo;
            if (o.address)
                jo["a"] = *o.address;
            jo["v"] = o.value;
            outs.push_back(std::move(jo));
        }
        j["out"] = std::move(outs);
        out << j.dump() << '\n';
    }
}

void write_chain_file(const ChainSnapshot& snap, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write chain file: " + path);
    write_chain_stream(snap, out);
    out.flush();
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

ChainStats chain_stats(const ChainSnapshot& snap) {
    ChainStats st;
    st.n_txs = snap.txs.size();
    std::unordered_set<std::string_view> addrs;
    for (const TxRecord& tx : snap.txs) {
        st.n_outputs += tx.outputs.size();
        for (const OutputRecord& o : tx.outputs)
            if (o.address)
                addrs.insert(*o.address);
    }
    st.n_addresses = addrs.size();
    return st;
}

std::string VennCounts::region_label(uint32_t mask) const {
    std::string label;
    for (size_t i = 0; i < chains.size(); ++i)
        if (mask & (uint32_t{1} << i)) {
            if (!label.empty())
                label += '+';
            label += chains[i];
        }
    return label;
}

uint64_t VennCounts::chain_total(const ChainId& chain) const {
    auto it = std::find(chains.begin(), chains.end(), chain);
    if (it == chains.end())
        throw std::invalid_argument("chain not part of this Venn decomposition: " + chain);
    uint32_t bit = uint32_t{1} << (it - chains.begin());
    uint64_t total = 0;
    for (const auto& [mask, count] : regions)
        if (mask & bit)
            total += count;
    return total;
}

VennCounts shared_address_counts(const std::vector<const ChainSnapshot*>& snapshots) {
    if (snapshots.empty())
        throw std::invalid_argument("shared_address_counts needs at least one chain");
    if (snapshots.size() > 32)
        throw std::invalid_argument("shared_address_counts supports at most 32 chains");

    VennCounts venn;
    std::vector<std::unordered_set<std::string_view>> sets(snapshots.size());
    for (size_t i = 0; i < snapshots.size(); ++i) {
        const ChainSnapshot& snap = *snapshots[i];
        for (const ChainId& prev : venn.chains)
            if (prev == snap.chain)
                throw std::invalid_argument("duplicate chain id: " + snap.chain);
        venn.chains.push_back(snap.chain);
        for (const TxRecord& tx : snap.txs)
            for (const OutputRecord& o : tx.outputs)
                if (o.address)
                    sets[i].insert(*o.address);
    }

    // Each address is classified once, on the first chain that has it.
    for (size_t i = 0; i < sets.size(); ++i) {
        for (std::string_view addr : sets[i]) {
            bool counted_before = false;
            for (size_t j = 0; j < i && !counted_before; ++j)
                counted_before = sets[j].count(addr) != 0;
            if (counted_before)
                continue;
            uint32_t mask = uint32_t{1} << i;
            for (size_t j = i + 1; j < sets.size(); ++j)
                if (sets[j].count(addr))
                    mask |= uint32_t{1} << j;
            ++venn.regions[mask];
        }
    }
    return venn;
}

void venn_to_csv(const VennCounts& venn, std::ostream& out) {
    out << "chains,count\n";
    for (const auto& [mask, count] : venn.regions)
        out << venn.region_label(mask) << ',' << count << '\n';
}

}  // namespace xchain
