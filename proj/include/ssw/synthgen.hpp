#pragma once

// Deterministic synthetic transaction networks: preferential-attachment
// background traffic plus injected phishing-funnel and mimic-scam motifs,
// with a ground-truth log of every edge touching a labeled principal.

#include <cstdint>
#include <string>
#include <vector>

#include "ssw/txgraph.hpp"

namespace ssw::synth {

// All timestamps are quantized to 12-second blocks from this epoch, so a
// block number determines its timestamp and re-ingest never conflicts.
inline constexpr std::uint64_t kEpoch = 1'600'000'000ULL;
inline constexpr std::uint64_t kBlockSeconds = 12;

struct SynthConfig {
    std::size_t n_accounts = 1000;
    std::size_t attachment_m = 2;  // edges per attached node
    std::size_t duration_days = 30;
    std::size_t phishing_count = 0;
    std::size_t scam_count = 0;
    double value_mu = -2.0;  // lognormal ETH amount parameters
    double value_sigma = 1.5;
    double edge_activity = 1.5;  // mean extra transactions per relationship
    std::uint64_t seed = 0;
};

enum class MotifKind { normal_activity, phishing_funnel, mimic_scam };
const char* motif_kind_name(MotifKind k);

struct MotifEdge {
    std::uint32_t edge = 0;
    std::string role;
};

struct Motif {
    MotifKind kind = MotifKind::normal_activity;
    std::uint32_t principal = 0;
    std::size_t fan_in = 0;  // phishing funnel width
    std::size_t depth = 0;   // mimic-scam layering depth
    std::size_t split = 0;   // transfers per layering hop
    std::vector<MotifEdge> edges;
};

struct SynthResult {
    tx::TemporalMultigraph graph;
    std::vector<Motif> motifs;
    // benign look-alike events per ordinary account: "surge", "merchant", "whale"
    std::vector<std::pair<std::uint32_t, std::string>> decoys;
};

// Deterministic under cfg.seed. Labels every account: principals get
// phishing/scam, everything else (victims, mules, counterparties) normal.
SynthResult generate(const SynthConfig& cfg);

// Account-id-independent hash over (address, label) pairs and edge tuples.
std::uint64_t content_hash(const tx::TemporalMultigraph& g);

// Transactions CSV/JSONL plus labels CSV in txgraph's ingest formats.
void export_graph(const tx::TemporalMultigraph& g, const std::string& tx_path,
                  tx::FileFormat format, const std::string& labels_path);

// One JSONL row per logged edge: edge id, motif kind, role, principal.
void write_motif_log(const std::string& path, const tx::TemporalMultigraph& g,
                     const std::vector<Motif>& motifs);

}  // namespace ssw::synth
