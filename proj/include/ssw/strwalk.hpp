#pragma once

// Structure Temporal Random Walk. From a start account, alternates a
// temporal step (pick the next edge forward in time, softmax over
// -delta_t/tau) with a structural step (sample the anchor's in-interval
// edges by value) to produce a time-ordered sequence of small directed
// subgraphs.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssw/rng.hpp"
#include "ssw/txgraph.hpp"

namespace ssw::walk {

struct WalkConfig {
    std::size_t max_walk_len = 20;
    std::size_t structural_window = 10;
    std::uint64_t interval_width = 86'400;  // seconds per temporal bin
    double tau = 0.0;                       // <= 0: mean inter-event gap of the graph
    std::size_t max_intervals = 16;
    std::uint64_t seed = 0;
    tx::Direction direction = tx::Direction::out;  // out or both
};

// Mean gap between consecutive event timestamps; 1.0 for degenerate graphs.
double default_tau(const tx::TemporalMultigraph& g);
double effective_tau(const tx::TemporalMultigraph& g, const WalkConfig& cfg);

// Stable hex digest of every config field; keys walk caches.
std::string config_hash(const WalkConfig& cfg);

struct SubEdge {
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    tx::u128 value = 0;
    std::uint64_t timestamp = 0;
};

struct Subgraph {
    std::uint32_t anchor = 0;
    std::vector<std::uint32_t> nodes;  // anchor first, then neighbors
    std::vector<SubEdge> edges;        // sorted by (timestamp, original order)
};

struct Interval {
    std::uint64_t t_lo = 0;
    std::uint64_t t_hi = 0;
};

struct SubgraphSequence {
    std::uint32_t start = 0;
    std::vector<Subgraph> subgraphs;
    std::vector<Interval> intervals;  // parallel to subgraphs
};

struct StepResult {
    std::uint32_t next_node = 0;
    std::uint32_t edge = 0;
};

// Picks an incident edge with timestamp >= t_cur, weighted by
// softmax(-(t_e - t_cur)/tau). Absence of candidates is a value.
std::optional<StepResult> temporal_step(const tx::TemporalMultigraph& g, std::uint32_t v,
                                        std::uint64_t t_cur, const WalkConfig& cfg, Rng& rng);

// Samples up to structural_window incident edges of `anchor` inside
// [t_lo, t_hi) without replacement, weight 1 + value_eth (softmax of
// log1p). No in-interval edges yields the singleton {anchor}.
Subgraph structural_step(const tx::TemporalMultigraph& g, std::uint32_t anchor, Interval interval,
                         const WalkConfig& cfg, Rng& rng);

SubgraphSequence run_walk(const tx::TemporalMultigraph& g, std::uint32_t v0,
                          const WalkConfig& cfg);

// walks_per_node sequences per start; walk (node, w) runs on seed
// cfg.seed ^ mix64(node, w), so order and parallelism cannot change results.
std::vector<SubgraphSequence> sample_dataset(const tx::TemporalMultigraph& g,
                                             const std::vector<std::uint32_t>& starts,
                                             const WalkConfig& cfg, std::size_t walks_per_node);

// JSONL cache: header row carries the config hash; a mismatching hash
// invalidates the cache (load returns nullopt).
void save_walk_cache(const std::string& path, const WalkConfig& cfg,
                     const std::vector<SubgraphSequence>& seqs);
std::optional<std::vector<SubgraphSequence>> load_walk_cache(const std::string& path,
                                                             const WalkConfig& cfg);
std::vector<SubgraphSequence> cache_or_sample(const tx::TemporalMultigraph& g,
                                              const std::vector<std::uint32_t>& starts,
                                              const WalkConfig& cfg, std::size_t walks_per_node,
                                              const std::string& cache_path);

}  // namespace ssw::walk
