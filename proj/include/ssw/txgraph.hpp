#pragma once

// Temporal transaction multigraph: dense account ids, parallel edges
// preserved, adjacency sorted by time so windowed queries can binary
// search. Immutable after finalize()/ingest; concurrent readers are safe.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ssw::tx {

using u128 = unsigned __int128;

// Decimal-string wei values; throws DataError on garbage or overflow.
u128 parse_u128(const std::string& s);
std::string format_u128(u128 v);

double value_eth(u128 wei);
// log10(1 + eth): the value feature used everywhere downstream
double log_value(u128 wei);

// Validates and lowercases a 0x-prefixed 20-byte hex address.
std::string normalize_address(const std::string& raw);

enum class Label : std::uint8_t { normal = 0, phishing = 1, scam = 2, unknown = 3 };

const char* label_name(Label l);
std::optional<Label> parse_label(const std::string& s);

struct Account {
    std::string address;
    Label label = Label::unknown;
};

struct Transaction {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    u128 value = 0;
    std::uint64_t timestamp = 0;
    std::uint64_t block = 0;
};

enum class Direction { in, out, both };

struct NeighborHit {
    std::uint32_t neighbor = 0;
    std::uint32_t edge = 0;
    std::uint64_t timestamp = 0;
    u128 value = 0;
};

class TemporalMultigraph {
public:
    // id of `address`, inserting a new unknown-labeled account if needed
    std::uint32_t intern(const std::string& address);
    std::uint32_t add_edge(std::uint32_t from, std::uint32_t to, u128 value,
                           std::uint64_t timestamp, std::uint64_t block);
    // sorts adjacency by (timestamp, edge id); call once after building
    void finalize();

    std::optional<std::uint32_t> find(const std::string& address) const;
    void set_label(std::uint32_t id, Label l) { accounts_[id].label = l; }

    std::size_t num_accounts() const { return accounts_.size(); }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<Account>& accounts() const { return accounts_; }
    const std::vector<Transaction>& edges() const { return edges_; }
    const Account& account(std::uint32_t id) const { return accounts_.at(id); }
    const Transaction& edge(std::uint32_t id) const { return edges_.at(id); }
    const std::vector<std::uint32_t>& out_adj(std::uint32_t id) const { return out_adj_.at(id); }
    const std::vector<std::uint32_t>& in_adj(std::uint32_t id) const { return in_adj_.at(id); }

    // incident edges with timestamp in [t_lo, t_hi), ordered by
    // (timestamp, edge id); `neighbor` is the far endpoint
    std::vector<NeighborHit> neighbors_in_window(std::uint32_t v, std::uint64_t t_lo,
                                                 std::uint64_t t_hi, Direction dir) const;

    std::uint64_t min_timestamp() const;
    std::uint64_t max_timestamp() const;

private:
    std::vector<Account> accounts_;
    std::vector<Transaction> edges_;
    std::vector<std::vector<std::uint32_t>> out_adj_, in_adj_;
    std::unordered_map<std::string, std::uint32_t> index_;
    bool finalized_ = false;
};

struct IngestOptions {
    bool allow_self_loops = false;
};

struct IngestSummary {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t dropped_self_loops = 0;
    std::size_t labels[4] = {0, 0, 0, 0};  // indexed by Label
};

enum class FileFormat { csv, jsonl };

struct IngestResult {
    TemporalMultigraph graph;
    IngestSummary summary;
};

IngestResult ingest(const std::string& path, FileFormat format,
                    const std::string& labels_path = "", const IngestOptions& opts = {});

// Labels CSV (`address,label`); rows for absent addresses are skipped.
// Conflicting duplicate rows are an error naming the line.
void apply_labels(TemporalMultigraph& g, const std::string& labels_path);

// Versioned binary container, magic "SSGR". Round-trips exactly.
void save_graph(const TemporalMultigraph& g, const std::string& path);
TemporalMultigraph load_graph(const std::string& path);

struct DegreeStats {
    std::map<std::size_t, std::size_t> histogram;  // degree -> count
    double alpha = 0.0;                            // power-law exponent (MLE)
    std::size_t k_min = 0;
    std::size_t tail_count = 0;  // accounts with degree >= k_min
};

// Degree = incident edge count (in + out). MLE fit over degrees >= k_min.
DegreeStats degree_stats(const TemporalMultigraph& g, std::size_t k_min = 3);

}  // namespace ssw::tx
