#include "ssw/txgraph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ssw/errors.hpp"

namespace ssw::tx {

u128 parse_u128(const std::string& s) {
    if (s.empty()) throw DataError("empty integer value");
    u128 v = 0;
    constexpr u128 max = ~static_cast<u128>(0);
    for (char c : s) {
        if (c < '0' || c > '9') throw DataError("invalid integer value '" + s + "'");
        const unsigned d = static_cast<unsigned>(c - '0');
        if (v > (max - d) / 10) throw DataError("integer value '" + s + "' overflows 128 bits");
        v = v * 10 + d;
    }
    return v;
}

std::string format_u128(u128 v) {
    if (v == 0) return "0";
    std::string out;
    while (v > 0) {
        out.push_back(static_cast<char>('0' + static_cast<unsigned>(v % 10)));
        v /= 10;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

double value_eth(u128 wei) {
    // split to keep the conversion exact for the 64-bit range
    const double hi = static_cast<double>(static_cast<std::uint64_t>(wei >> 64));
    const double lo = static_cast<double>(static_cast<std::uint64_t>(wei));
    return (hi * 18446744073709551616.0 + lo) * 1e-18;
}

double log_value(u128 wei) { return std::log10(1.0 + value_eth(wei)); }

std::string normalize_address(const std::string& raw) {
    if (raw.size() != 42 || raw[0] != '0' || (raw[1] != 'x' && raw[1] != 'X'))
        throw DataError("invalid address '" + raw + "': want 0x followed by 40 hex digits");
    std::string out = "0x";
    out.reserve(42);
    for (std::size_t i = 2; i < raw.size(); ++i) {
        char c = raw[i];
        if (c >= 'A' && c <= 'F') c = static_cast<char>(c - 'A' + 'a');
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
            throw DataError("invalid address '" + raw + "': want 0x followed by 40 hex digits");
        out.push_back(c);
    }
    return out;
}

const char* label_name(Label l) {
    switch (l) {
        case Label::normal: return "normal";
        case Label::phishing: return "phishing";
        case Label::scam: return "scam";
        case Label::unknown: return "unknown";
    }
    return "?";
}

std::optional<Label> parse_label(const std::string& s) {
    if (s == "normal") return Label::normal;
    if (s == "phishing") return Label::phishing;
    if (s == "scam") return Label::scam;
    if (s == "unknown") return Label::unknown;
    return std::nullopt;
}

std::uint32_t TemporalMultigraph::intern(const std::string& address) {
    auto it = index_.find(address);
    if (it != index_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(accounts_.size());
    accounts_.push_back(Account{address, Label::unknown});
    out_adj_.emplace_back();
    in_adj_.emplace_back();
    index_.emplace(address, id);
    return id;
}

std::uint32_t TemporalMultigraph::add_edge(std::uint32_t from, std::uint32_t to, u128 value,
                                           std::uint64_t timestamp, std::uint64_t block) {
    if (from >= accounts_.size() || to >= accounts_.size())
        throw std::out_of_range("add_edge: unknown account id");
    const auto id = static_cast<std::uint32_t>(edges_.size());
    edges_.push_back(Transaction{from, to, value, timestamp, block});
    out_adj_[from].push_back(id);
    in_adj_[to].push_back(id);
    finalized_ = false;
    return id;
}

void TemporalMultigraph::finalize() {
    auto by_time = [this](std::uint32_t a, std::uint32_t b) {
        if (edges_[a].timestamp != edges_[b].timestamp)
            return edges_[a].timestamp < edges_[b].timestamp;
        return a < b;
    };
    for (auto& adj : out_adj_) std::sort(adj.begin(), adj.end(), by_time);
    for (auto& adj : in_adj_) std::sort(adj.begin(), adj.end(), by_time);
    finalized_ = true;
}

std::optional<std::uint32_t> TemporalMultigraph::find(const std::string& address) const {
    auto it = index_.find(address);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<NeighborHit> TemporalMultigraph::neighbors_in_window(std::uint32_t v,
                                                                 std::uint64_t t_lo,
                                                                 std::uint64_t t_hi,
                                                                 Direction dir) const {
    if (v >= accounts_.size())
        throw std::out_of_range("neighbors_in_window: unknown account id " + std::to_string(v));
    if (t_lo > t_hi) throw std::invalid_argument("neighbors_in_window: t_lo > t_hi");

    std::vector<NeighborHit> out;
    auto scan = [&](const std::vector<std::uint32_t>& adj, bool outgoing) {
        auto first = std::lower_bound(adj.begin(), adj.end(), t_lo,
                                      [this](std::uint32_t e, std::uint64_t t) {
                                          return edges_[e].timestamp < t;
                                      });
        for (auto it = first; it != adj.end(); ++it) {
            const Transaction& e = edges_[*it];
            if (e.timestamp >= t_hi) break;
            out.push_back(NeighborHit{outgoing ? e.to : e.from, *it, e.timestamp, e.value});
        }
    };
    if (dir == Direction::out || dir == Direction::both) scan(out_adj_[v], true);
    if (dir == Direction::in || dir == Direction::both) scan(in_adj_[v], false);
    if (dir == Direction::both) {
        std::sort(out.begin(), out.end(), [](const NeighborHit& a, const NeighborHit& b) {
            if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
            return a.edge < b.edge;
        });
    }
    return out;
}

std::uint64_t TemporalMultigraph::min_timestamp() const {
    std::uint64_t t = ~static_cast<std::uint64_t>(0);
    for (const auto& e : edges_) t = std::min(t, e.timestamp);
    return edges_.empty() ? 0 : t;
}

std::uint64_t TemporalMultigraph::max_timestamp() const {
    std::uint64_t t = 0;
    for (const auto& e : edges_) t = std::max(t, e.timestamp);
    return t;
}

DegreeStats degree_stats(const TemporalMultigraph& g, std::size_t k_min) {
    if (g.num_accounts() == 0) throw DataError("degree_stats: empty graph");
    DegreeStats st;
    st.k_min = k_min;
    bool any_edge = false;
    std::vector<std::size_t> degrees(g.num_accounts());
    for (std::uint32_t v = 0; v < g.num_accounts(); ++v) {
        degrees[v] = g.out_adj(v).size() + g.in_adj(v).size();
        any_edge = any_edge || degrees[v] > 0;
        ++st.histogram[degrees[v]];
    }
    if (!any_edge) throw DataError("degree_stats: all accounts are isolated");

    // discrete power-law MLE (Clauset et al.): alpha = 1 + n / sum ln(d / (k_min - 0.5))
    double log_sum = 0.0;
    for (std::size_t d : degrees) {
        if (d < k_min) continue;
        ++st.tail_count;
        log_sum += std::log(static_cast<double>(d) / (static_cast<double>(k_min) - 0.5));
    }
    if (st.tail_count > 0 && log_sum > 0.0)
        st.alpha = 1.0 + static_cast<double>(st.tail_count) / log_sum;
    return st;
}

}  // namespace ssw::tx
