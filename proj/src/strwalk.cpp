#include "ssw/strwalk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ssw/errors.hpp"
#include "ssw/hash.hpp"
#include "ssw/ops.hpp"

namespace ssw::walk {

double default_tau(const tx::TemporalMultigraph& g) {
    if (g.num_edges() < 2) return 1.0;
    const std::uint64_t lo = g.min_timestamp(), hi = g.max_timestamp();
    if (hi <= lo) return 1.0;
    return static_cast<double>(hi - lo) / static_cast<double>(g.num_edges() - 1);
}

double effective_tau(const tx::TemporalMultigraph& g, const WalkConfig& cfg) {
    return cfg.tau > 0.0 ? cfg.tau : default_tau(g);
}

std::string config_hash(const WalkConfig& cfg) {
    std::ostringstream os;
    os << "walk_len=" << cfg.max_walk_len << ";window=" << cfg.structural_window
       << ";interval=" << cfg.interval_width << ";tau=" << cfg.tau
       << ";max_intervals=" << cfg.max_intervals << ";seed=" << cfg.seed
       << ";direction=" << (cfg.direction == tx::Direction::both ? "both" : "out");
    const std::string s = os.str();
    return hex_u64(fnv1a(s));
}

std::optional<StepResult> temporal_step(const tx::TemporalMultigraph& g, std::uint32_t v,
                                        std::uint64_t t_cur, const WalkConfig& cfg, Rng& rng) {
    const auto hits = g.neighbors_in_window(v, t_cur, std::numeric_limits<std::uint64_t>::max(),
                                            cfg.direction);
    if (hits.empty()) return std::nullopt;
    const double tau = effective_tau(g, cfg);
    std::vector<double> scores(hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i)
        scores[i] = -(static_cast<double>(hits[i].timestamp - t_cur)) / tau;
    const std::vector<double> p = nn::softmax_values(scores.data(), scores.size());
    const std::size_t pick = rng.categorical(p.data(), p.size(), 1.0);
    return StepResult{hits[pick].neighbor, hits[pick].edge};
}

Subgraph structural_step(const tx::TemporalMultigraph& g, std::uint32_t anchor, Interval interval,
                         const WalkConfig& cfg, Rng& rng) {
    Subgraph sg;
    sg.anchor = anchor;
    sg.nodes.push_back(anchor);

    auto hits = g.neighbors_in_window(anchor, interval.t_lo, interval.t_hi, tx::Direction::both);
    if (hits.empty()) return sg;

    // softmax over log1p(eth) == weights proportional to 1 + value_eth
    std::vector<double> w(hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i) w[i] = 1.0 + tx::value_eth(hits[i].value);

    std::vector<std::uint32_t> picked;
    const std::size_t take = std::min(cfg.structural_window, hits.size());
    double total = 0.0;
    for (double x : w) total += x;
    std::vector<std::size_t> alive(hits.size());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
    for (std::size_t round = 0; round < take; ++round) {
        std::vector<double> cur(alive.size());
        for (std::size_t i = 0; i < alive.size(); ++i) cur[i] = w[alive[i]];
        const std::size_t pos = rng.categorical(cur.data(), cur.size(), total);
        const std::size_t idx = alive[pos];
        picked.push_back(static_cast<std::uint32_t>(idx));
        total -= w[idx];
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(pos));
    }
    std::sort(picked.begin(), picked.end());  // restore (timestamp, edge id) order

    for (std::uint32_t idx : picked) {
        const auto& h = hits[idx];
        const auto& e = g.edge(h.edge);
        sg.edges.push_back(SubEdge{e.from, e.to, e.value, e.timestamp});
        if (std::find(sg.nodes.begin(), sg.nodes.end(), h.neighbor) == sg.nodes.end())
            sg.nodes.push_back(h.neighbor);
    }
    return sg;
}

SubgraphSequence run_walk(const tx::TemporalMultigraph& g, std::uint32_t v0,
                          const WalkConfig& cfg) {
    if (v0 >= g.num_accounts())
        throw std::out_of_range("run_walk: unknown account id " + std::to_string(v0));
    SubgraphSequence seq;
    seq.start = v0;

    const auto all = g.neighbors_in_window(v0, 0, std::numeric_limits<std::uint64_t>::max(),
                                           tx::Direction::both);
    if (all.empty()) return seq;  // isolated start
    const std::uint64_t t_first = all.front().timestamp;

    Rng rng(cfg.seed);
    std::uint32_t v = v0;
    std::uint64_t t_cur = t_first;
    std::int64_t last_interval = -1;
    for (std::size_t step = 0; step < cfg.max_walk_len; ++step) {
        const auto next = temporal_step(g, v, t_cur, cfg, rng);
        if (!next) break;
        const std::uint64_t t_e = g.edge(next->edge).timestamp;
        const auto k = static_cast<std::int64_t>((t_e - t_first) / cfg.interval_width);
        if (k != last_interval) {
            Interval iv{t_first + static_cast<std::uint64_t>(k) * cfg.interval_width,
                        t_first + static_cast<std::uint64_t>(k + 1) * cfg.interval_width};
            seq.subgraphs.push_back(structural_step(g, v, iv, cfg, rng));
            seq.intervals.push_back(iv);
            last_interval = k;
            if (seq.subgraphs.size() >= cfg.max_intervals) break;
        }
        v = next->next_node;
        t_cur = t_e;
    }
    return seq;
}

std::vector<SubgraphSequence> sample_dataset(const tx::TemporalMultigraph& g,
                                             const std::vector<std::uint32_t>& starts,
                                             const WalkConfig& cfg, std::size_t walks_per_node) {
    if (starts.empty()) throw DataError("sample_dataset: no start nodes");
    std::vector<SubgraphSequence> out;
    out.reserve(starts.size() * walks_per_node);
    for (const std::uint32_t node : starts) {
        for (std::size_t widx = 0; widx < walks_per_node; ++widx) {
            WalkConfig child = cfg;
            child.seed = cfg.seed ^ mix64(node, widx);
            out.push_back(run_walk(g, node, child));
        }
    }
    return out;
}

}  // namespace ssw::walk
