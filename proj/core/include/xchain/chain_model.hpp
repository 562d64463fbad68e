// Canonical transaction model shared by every analysis stage.
//
// A chain is stored as one JSON object per line, in total order:
//   {"tx":"<id>","h":<height>,"t":<unix_seconds>,"in":["<addr>",...],
//    "out":[{"a":"<addr>","v":<int>},{"v":<int>},...]}
// Inputs are the addresses referenced by the spent outputs (already
// resolved; no outpoints).  An output without an "a" key carries no
// address (OP_RETURN and friends).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xchain {

using ChainId = std::string;
using AddressKey = std::string;

struct OutputRecord {
    std::optional<AddressKey> address;  // absent for address-less scripts
    uint64_t value = 0;

    bool operator==(const OutputRecord&) const = default;
};

struct TxRecord {
    ChainId chain;
    uint64_t height = 0;
    int64_t timestamp = 0;  // unix seconds from the block header
    std::string tx_id;
    uint64_t ordinal = 0;  // position in the chain's total order
    std::vector<AddressKey> inputs;  // empty for coinbase/coinstake
    std::vector<OutputRecord> outputs;

    bool operator==(const TxRecord&) const = default;
};

struct ChainSnapshot {
    ChainId chain;
    std::vector<TxRecord> txs;  // ascending ordinal, non-decreasing height
};

struct ChainStats {
    uint64_t n_txs = 0;
    uint64_t n_outputs = 0;
    uint64_t n_addresses = 0;  // distinct addresses appearing in outputs
};

// Raised on canonical-format violations; the message names the offending
// file line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, size_t line)
        : std::runtime_error(what), line_(line) {}
    size_t line() const { return line_; }

private:
    size_t line_;
};

// Reads one chain file.  Hard violations (malformed JSON, duplicate tx id,
// decreasing height, empty outputs) throw ParseError.  Inputs that
// reference an address never seen in an earlier output are legal -- the
// file may start mid-history -- and are reported through `warnings`, once
// per address.
ChainSnapshot parse_chain_file(const std::string& path, const ChainId& chain,
                               std::vector<std::string>* warnings = nullptr);
ChainSnapshot parse_chain_stream(std::istream& in, const ChainId& chain,
                                 const std::string& origin = "<stream>",
                                 std::vector<std::string>* warnings = nullptr);

// Writes the canonical one-object-per-line form with fixed key order, so
// equal snapshots serialize to identical bytes.
void write_chain_file(const ChainSnapshot& snap, const std::string& path);
void write_chain_stream(const ChainSnapshot& snap, std::ostream& out);

ChainStats chain_stats(const ChainSnapshot& snap);

// Venn decomposition of the output-address sets of several chains.  Region
// masks index into `chains`: bit i set means the region lies on chains[i].
struct VennCounts {
    std::vector<ChainId> chains;
    std::map<uint32_t, uint64_t> regions;  // non-empty region mask -> count

    std::string region_label(uint32_t mask) const;  // "btclike+ltclike"
    // Total addresses present on `chain` (sum of all regions covering it).
    uint64_t chain_total(const ChainId& chain) const;
};

VennCounts shared_address_counts(const std::vector<const ChainSnapshot*>& snapshots);

void venn_to_csv(const VennCounts& venn, std::ostream& out);

}  // namespace xchain
