#pragma once

// Subgraph encoder: one GAT layer over the aligned feature matrix of
// each interval's subgraph, read out at the anchor row, producing the
// interval-ordered sequence feature Phi (m x d_h). Attention runs over
// the true rows only; padded rows contribute nothing and output zero.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ssw/features.hpp"
#include "ssw/strwalk.hpp"
#include "ssw/tensor.hpp"
#include "ssw/txgraph.hpp"

namespace ssw::enc {

struct EncoderConfig {
    std::size_t d_in = feat::kInputCols;
    std::size_t d_h = 64;   // embedding width D, split across heads
    std::size_t heads = 4;  // d_h must divide evenly
    std::size_t n_max = 10;
    bool mean_readout = false;   // default: anchor (center-node) readout
    bool use_attention = true;   // false: linear-map ablation, no mixing or nonlinearity
    std::uint64_t seed = 0;
};

struct GatLayer {
    nn::Tensor w_proj;  // d_in x d_h, Xavier-uniform gain 1.414
    nn::Tensor attn;    // heads x 2*(d_h/heads), zero-initialized
};

struct Encoder {
    EncoderConfig cfg;
    nn::Tensor w_agg;  // 1 x n_max feature aggregation weights
    GatLayer gat;

    std::vector<nn::Tensor> parameters() const { return {w_agg, gat.w_proj, gat.attn}; }
};

Encoder make_encoder(const EncoderConfig& cfg);

using Mask = std::vector<std::uint8_t>;  // per-row true flags, anchor first

// (n_max+1) x d_h embeddings; scores LeakyReLU(0.2) of additive
// attention, softmax over true rows, heads concatenated, ELU.
nn::Tensor gat_forward(const nn::Tensor& aligned, const Mask& mask, const GatLayer& gat,
                       const EncoderConfig& cfg);

// Per-head attention matrices (forward only), for inspection; row i
// holds the coefficients node i assigns across nodes j.
std::vector<nn::Tensor> gat_attention(const nn::Tensor& aligned, const Mask& mask,
                                      const GatLayer& gat, const EncoderConfig& cfg);

// anchor mode returns row 0; mean mode averages the true rows.
nn::Tensor readout(const nn::Tensor& h, const Mask& mask, bool mean_pool);

struct SequenceFeature {
    nn::Tensor phi;           // m x d_h, rows in interval order
    std::size_t true_len = 0; // 0 only for the degenerate single-zero-row case
};

// Static per-subgraph features for one sequence, reusable across epochs.
std::vector<feat::Prepared> prepare_sequence(const tx::TemporalMultigraph& g,
                                             const walk::SubgraphSequence& seq);

SequenceFeature encode_prepared(const std::vector<feat::Prepared>& pres, const Encoder& encoder);

SequenceFeature encode_sequence(const tx::TemporalMultigraph& g, const walk::SubgraphSequence& seq,
                                const Encoder& encoder);

}  // namespace ssw::enc
