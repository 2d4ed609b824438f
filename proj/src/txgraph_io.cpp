#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssw/errors.hpp"
#include "ssw/txgraph.hpp"

namespace ssw::tx {

namespace {

std::uint64_t parse_u64_field(const std::string& s, const std::string& where) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw DataError(where + ": invalid integer '" + s + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

// Enforces: one timestamp per block, timestamps non-decreasing in block
// number. Checked incrementally so errors can name the offending line.
class BlockClock {
public:
    void observe(std::uint64_t block, std::uint64_t ts, const std::string& where) {
        auto [it, inserted] = seen_.try_emplace(block, ts);
        if (!inserted) {
            if (it->second != ts)
                throw DataError(where + ": block " + std::to_string(block) +
                                " has conflicting timestamps " + std::to_string(it->second) +
                                " and " + std::to_string(ts));
            return;
        }
        if (it != seen_.begin()) {
            auto prev = std::prev(it);
            if (prev->second > ts)
                throw DataError(where + ": timestamp " + std::to_string(ts) + " of block " +
                                std::to_string(block) + " decreases below block " +
                                std::to_string(prev->first) + " at timestamp " +
                                std::to_string(prev->second));
        }
        auto next = std::next(it);
        if (next != seen_.end() && next->second < ts)
            throw DataError(where + ": timestamp " + std::to_string(ts) + " of block " +
                            std::to_string(block) + " exceeds later block " +
                            std::to_string(next->first) + " at timestamp " +
                            std::to_string(next->second));
    }

private:
    std::map<std::uint64_t, std::uint64_t> seen_;
};

struct RawRow {
    std::string from, to;
    u128 value;
    std::uint64_t timestamp, block;
};

void add_row(TemporalMultigraph& g, IngestSummary& sum, BlockClock& clock, const RawRow& row,
             const IngestOptions& opts, const std::string& where) {
    clock.observe(row.block, row.timestamp, where);
    const std::string from = normalize_address(row.from);
    const std::string to = normalize_address(row.to);
    if (from == to && !opts.allow_self_loops) {
        ++sum.dropped_self_loops;
        return;
    }
    const std::uint32_t from_id = g.intern(from);
    const std::uint32_t to_id = g.intern(to);
    g.add_edge(from_id, to_id, row.value, row.timestamp, row.block);
}

void ingest_csv(TemporalMultigraph& g, IngestSummary& sum, const std::string& path,
                const IngestOptions& opts) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    BlockClock clock;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        if (lineno == 1) {
            if (line != "from,to,value,timestamp,block")
                throw DataError(where + ": expected header 'from,to,value,timestamp,block', got '" +
                                line + "'");
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 5)
            throw DataError(where + ": expected 5 fields, got " + std::to_string(fields.size()));
        RawRow row;
        row.from = fields[0];
        row.to = fields[1];
        row.value = parse_u128(fields[2]);
        row.timestamp = parse_u64_field(fields[3], where);
        row.block = parse_u64_field(fields[4], where);
        add_row(g, sum, clock, row, opts, where);
    }
}

u128 value_from_json(const nlohmann::json& v, const std::string& where) {
    if (v.is_string()) return parse_u128(v.get<std::string>());
    if (v.is_number_unsigned()) return static_cast<u128>(v.get<std::uint64_t>());
    throw DataError(where + ": value must be a decimal string or unsigned integer");
}

void ingest_jsonl(TemporalMultigraph& g, IngestSummary& sum, const std::string& path,
                  const IngestOptions& opts) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    BlockClock clock;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object())
            throw DataError(where + ": not a JSON object");
        for (const char* key : {"from", "to", "value", "timestamp", "block"})
            if (!obj.contains(key)) throw DataError(where + ": missing key '" + key + "'");
        if (!obj["from"].is_string() || !obj["to"].is_string())
            throw DataError(where + ": from/to must be address strings");
        if (!obj["timestamp"].is_number_unsigned() || !obj["block"].is_number_unsigned())
            throw DataError(where + ": timestamp/block must be unsigned integers");
        RawRow row;
        row.from = obj["from"].get<std::string>();
        row.to = obj["to"].get<std::string>();
        row.value = value_from_json(obj["value"], where);
        row.timestamp = obj["timestamp"].get<std::uint64_t>();
        row.block = obj["block"].get<std::uint64_t>();
        add_row(g, sum, clock, row, opts, where);
    }
}

}  // namespace

void apply_labels(TemporalMultigraph& g, const std::string& labels_path) {
    std::ifstream in(labels_path);
    if (!in) throw FileError("cannot open " + labels_path);
    std::string line;
    std::size_t lineno = 0;
    std::map<std::string, std::pair<Label, std::size_t>> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = labels_path + ":" + std::to_string(lineno);
        if (lineno == 1) {
            if (line != "address,label")
                throw DataError(where + ": expected header 'address,label', got '" + line + "'");
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 2)
            throw DataError(where + ": expected 2 fields, got " + std::to_string(fields.size()));
        const std::string address = normalize_address(fields[0]);
        const auto label = parse_label(fields[1]);
        if (!label || *label == Label::unknown)
            throw DataError(where + ": unknown label '" + fields[1] +
                            "' (want normal, phishing, or scam)");
        auto [it, inserted] = seen.try_emplace(address, *label, lineno);
        if (!inserted && it->second.first != *label)
            throw DataError(where + ": address " + address + " already labeled '" +
                            label_name(it->second.first) + "' on line " +
                            std::to_string(it->second.second));
        if (auto id = g.find(address)) g.set_label(*id, *label);
    }
}

IngestResult ingest(const std::string& path, FileFormat format, const std::string& labels_path,
                    const IngestOptions& opts) {
    IngestResult res;
    if (format == FileFormat::csv)
        ingest_csv(res.graph, res.summary, path, opts);
    else
        ingest_jsonl(res.graph, res.summary, path, opts);
    res.graph.finalize();
    if (!labels_path.empty()) apply_labels(res.graph, labels_path);
    res.summary.nodes = res.graph.num_accounts();
    res.summary.edges = res.graph.num_edges();
    for (const auto& a : res.graph.accounts()) ++res.summary.labels[static_cast<int>(a.label)];
    return res;
}

namespace {

constexpr char kMagic[4] = {'S', 'S', 'G', 'R'};
constexpr std::uint16_t kVersion = 1;

void put_bytes(std::string& buf, const void* p, std::size_t n) {
    buf.append(static_cast<const char*>(p), n);
}

template <typename T>
void put_le(std::string& buf, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u128(std::string& buf, u128 v) {
    put_le<std::uint64_t>(buf, static_cast<std::uint64_t>(v));
    put_le<std::uint64_t>(buf, static_cast<std::uint64_t>(v >> 64));
}

// 0x-prefixed hex address -> 20 raw bytes
void put_address(std::string& buf, const std::string& addr) {
    auto nibble = [](char c) -> unsigned {
        return c <= '9' ? static_cast<unsigned>(c - '0') : static_cast<unsigned>(c - 'a' + 10);
    };
    for (std::size_t i = 2; i < 42; i += 2)
        buf.push_back(static_cast<char>((nibble(addr[i]) << 4) | nibble(addr[i + 1])));
}

class Cursor {
public:
    Cursor(const std::string& buf, const std::string& path) : buf_(buf), path_(path) {}

    const char* take(std::size_t n) {
        if (pos_ + n > buf_.size()) throw DataError(path_ + ": truncated graph file");
        const char* p = buf_.data() + pos_;
        pos_ += n;
        return p;
    }

    template <typename T>
    T get_le() {
        const char* p = take(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<T>(static_cast<unsigned char>(p[i])) << (8 * i);
        return v;
    }

    u128 get_u128() {
        const std::uint64_t lo = get_le<std::uint64_t>();
        const std::uint64_t hi = get_le<std::uint64_t>();
        return (static_cast<u128>(hi) << 64) | lo;
    }

    std::string get_address() {
        static const char* digits = "0123456789abcdef";
        const char* p = take(20);
        std::string out = "0x";
        for (std::size_t i = 0; i < 20; ++i) {
            const auto b = static_cast<unsigned char>(p[i]);
            out.push_back(digits[b >> 4]);
            out.push_back(digits[b & 0xF]);
        }
        return out;
    }

    bool at_end() const { return pos_ == buf_.size(); }

private:
    const std::string& buf_;
    const std::string& path_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_graph(const TemporalMultigraph& g, const std::string& path) {
    std::string buf;
    buf.reserve(16 + 21 * g.num_accounts() + 40 * g.num_edges());
    put_bytes(buf, kMagic, 4);
    put_le<std::uint16_t>(buf, kVersion);
    put_le<std::uint64_t>(buf, g.num_accounts());
    for (const auto& a : g.accounts()) {
        put_address(buf, a.address);
        put_le<std::uint8_t>(buf, static_cast<std::uint8_t>(a.label));
    }
    put_le<std::uint64_t>(buf, g.num_edges());
    for (const auto& e : g.edges()) {
        put_le<std::uint32_t>(buf, e.from);
        put_le<std::uint32_t>(buf, e.to);
        put_u128(buf, e.value);
        put_le<std::uint64_t>(buf, e.timestamp);
        put_le<std::uint64_t>(buf, e.block);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open " + path + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw FileError("short write to " + path);
}

TemporalMultigraph load_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string buf = ss.str();

    Cursor cur(buf, path);
    const char* magic = cur.take(4);
    if (std::string(magic, 4) != std::string(kMagic, 4))
        throw DataError(path + ": not a graph file (bad magic)");
    const auto version = cur.get_le<std::uint16_t>();
    if (version != kVersion)
        throw DataError(path + ": unsupported graph version " + std::to_string(version));

    TemporalMultigraph g;
    const auto n_accounts = cur.get_le<std::uint64_t>();
    for (std::uint64_t i = 0; i < n_accounts; ++i) {
        const std::string address = cur.get_address();
        const auto label = cur.get_le<std::uint8_t>();
        if (label > 3) throw DataError(path + ": invalid label byte for account " + address);
        const std::uint32_t id = g.intern(address);
        if (id != i) throw DataError(path + ": duplicate account " + address);
        g.set_label(id, static_cast<Label>(label));
    }
    const auto n_edges = cur.get_le<std::uint64_t>();
    for (std::uint64_t i = 0; i < n_edges; ++i) {
        const auto from = cur.get_le<std::uint32_t>();
        const auto to = cur.get_le<std::uint32_t>();
        const u128 value = cur.get_u128();
        const auto ts = cur.get_le<std::uint64_t>();
        const auto block = cur.get_le<std::uint64_t>();
        if (from >= n_accounts || to >= n_accounts)
            throw DataError(path + ": edge " + std::to_string(i) + " references unknown account");
        g.add_edge(from, to, value, ts, block);
    }
    if (!cur.at_end()) throw DataError(path + ": trailing bytes after graph data");
    g.finalize();
    return g;
}

}  // namespace ssw::tx
