#pragma once

// Sequence classifier over Phi. Transposed mode embeds each of the D
// hidden channels from its temporal profile and attends across the D
// channel tokens; conventional mode attends across temporal tokens with
// sinusoidal positions and a key mask. Both share the projection head.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssw/encoder.hpp"
#include "ssw/tensor.hpp"

namespace ssw::seq {

struct SeqConfig {
    std::size_t d_model = 64;  // token width d
    std::size_t d_phi = 64;    // channel count D, must equal encoder d_h
    std::size_t m_max = 32;    // temporal rows kept per sequence
    std::size_t blocks = 2;
    std::size_t n_classes = 3;  // normal / phishing / scam
    bool transposed = true;
    std::uint64_t seed = 0;
};

nlohmann::json config_json(const SeqConfig& cfg);
SeqConfig config_from_json(const nlohmann::json& j);  // DataError on bad fields

struct Block {
    nn::Tensor ln1_g, ln1_b;
    nn::Tensor wq, wk, wv;  // d x d, no bias
    nn::Tensor ln2_g, ln2_b;
    nn::Tensor w1, b1, w2, b2;  // FFN d -> 4d -> d
};

struct SeqModel {
    SeqConfig cfg;
    nn::Tensor channel_embed;  // m_max x d (transposed mode)
    nn::Tensor input_proj;     // D x d (conventional mode)
    std::vector<Block> blocks;
    nn::Tensor agg;                 // 1 x D token aggregation (transposed mode)
    nn::Tensor p1, pb1, p2, pb2;    // projection head d -> d -> C

    // learnable tensors of the active mode, in checkpoint order
    std::vector<std::pair<std::string, nn::Tensor>> named_parameters() const;
    std::vector<nn::Tensor> parameters() const;
};

SeqModel make_seqmodel(const SeqConfig& cfg);

using Mask = std::vector<std::uint8_t>;

struct Padded {
    nn::Tensor phi;  // m_max x D, padded rows exactly zero
    Mask mask;       // true = real row; degenerate sequences get one true zero row
};

// keeps the most recent m_max rows when the sequence is longer
Padded pad_sequence(const enc::SequenceFeature& sf, std::size_t m_max);

// pre-norm residual block; mask excludes key positions from attention
nn::Tensor attention_block(const nn::Tensor& x, const Mask& mask, const Block& blk,
                           std::size_t d);
// the block's attention matrix (forward only), rows sum to 1
nn::Tensor block_attention(const nn::Tensor& x, const Mask& mask, const Block& blk,
                           std::size_t d);

// final token states before pooling: D x d (transposed), m_max x d (conventional)
nn::Tensor token_states(const SeqModel& m, const Padded& p);

nn::Tensor head_logits(const SeqModel& m, const nn::Tensor& pooled);  // 1 x C

nn::Tensor forward_transposed(const SeqModel& m, const Padded& p);
nn::Tensor forward_conventional(const SeqModel& m, const Padded& p);
// dispatches on cfg.transposed
nn::Tensor forward(const SeqModel& m, const Padded& p);

struct Prediction {
    std::size_t cls = 0;
    std::vector<double> probs;  // softmax of the logits, sums to 1
};

Prediction predict(const SeqModel& m, const enc::SequenceFeature& sf);

}  // namespace ssw::seq
