#include "ssw/encoder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ssw/ops.hpp"
#include "ssw/rng.hpp"

namespace ssw::enc {

namespace {

void check_config(const EncoderConfig& cfg) {
    if (cfg.heads == 0 || cfg.d_h % cfg.heads != 0)
        throw std::invalid_argument("encoder: d_h " + std::to_string(cfg.d_h) +
                                    " not divisible by heads " + std::to_string(cfg.heads));
    if (cfg.d_in == 0 || cfg.n_max == 0) throw std::invalid_argument("encoder: empty dimensions");
}

void check_inputs(const nn::Tensor& aligned, const Mask& mask, const EncoderConfig& cfg) {
    const std::size_t n_rows = cfg.n_max + 1;
    if (aligned.ndim() != 2 || aligned.rows() != n_rows || aligned.cols() != cfg.d_in)
        throw std::invalid_argument("gat_forward: aligned is " + aligned.shape_str() +
                                    ", expected (" + std::to_string(n_rows) + "x" +
                                    std::to_string(cfg.d_in) + ")");
    if (mask.size() != n_rows)
        throw std::invalid_argument("gat_forward: mask size " + std::to_string(mask.size()) +
                                    " != " + std::to_string(n_rows));
    if (!mask[0]) throw std::invalid_argument("gat_forward: anchor row must be true");
}

// column bias: 0 on true rows, -1e30 on padding, so masked entries get
// exactly zero attention after softmax
nn::Tensor column_bias(const Mask& mask) {
    const std::size_t n = mask.size();
    std::vector<double> data(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        if (!mask[j])
            for (std::size_t i = 0; i < n; ++i) data[i * n + j] = -1e30;
    return nn::Tensor::from({n, n}, std::move(data));
}

nn::Tensor row_mask(const Mask& mask, std::size_t cols) {
    std::vector<double> data(mask.size() * cols, 0.0);
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) std::fill_n(data.begin() + i * cols, cols, 1.0);
    return nn::Tensor::from({mask.size(), cols}, std::move(data));
}

struct HeadOut {
    nn::Tensor att;  // n_rows x n_rows
    nn::Tensor hh;   // n_rows x d_head
};

std::vector<HeadOut> attention_heads(const nn::Tensor& aligned, const Mask& mask,
                                     const GatLayer& gat, const EncoderConfig& cfg) {
    const std::size_t d_head = cfg.d_h / cfg.heads;
    const nn::Tensor h = nn::matmul(aligned, gat.w_proj);
    const nn::Tensor bias = column_bias(mask);
    std::vector<HeadOut> out;
    out.reserve(cfg.heads);
    for (std::size_t k = 0; k < cfg.heads; ++k) {
        nn::Tensor hh = nn::slice_cols(h, k * d_head, (k + 1) * d_head);
        nn::Tensor a = nn::slice_rows(gat.attn, k, k + 1);
        nn::Tensor src = nn::matmul(hh, nn::transpose(nn::slice_cols(a, 0, d_head)));
        nn::Tensor dst = nn::matmul(hh, nn::transpose(nn::slice_cols(a, d_head, 2 * d_head)));
        nn::Tensor scores = nn::leaky_relu(nn::outer_add(src, dst), 0.2);
        out.push_back({nn::softmax(nn::add(scores, bias)), std::move(hh)});
    }
    return out;
}

}  // namespace

Encoder make_encoder(const EncoderConfig& cfg) {
    check_config(cfg);
    Rng rng(cfg.seed);
    const double limit = 1.414 * std::sqrt(6.0 / static_cast<double>(cfg.d_in + cfg.d_h));
    Encoder e;
    e.cfg = cfg;
    e.w_agg = nn::Tensor::zeros({1, cfg.n_max}, true);
    e.gat.w_proj = nn::Tensor::randu({cfg.d_in, cfg.d_h}, rng, -limit, limit, true);
    e.gat.attn = nn::Tensor::zeros({cfg.heads, 2 * (cfg.d_h / cfg.heads)}, true);
    return e;
}

nn::Tensor gat_forward(const nn::Tensor& aligned, const Mask& mask, const GatLayer& gat,
                       const EncoderConfig& cfg) {
    check_config(cfg);
    check_inputs(aligned, mask, cfg);
    if (!cfg.use_attention) {
        // ablation: plain linear map of the rows, no mixing, no nonlinearity
        return nn::mul(nn::matmul(aligned, gat.w_proj), row_mask(mask, cfg.d_h));
    }
    auto heads = attention_heads(aligned, mask, gat, cfg);
    std::vector<nn::Tensor> parts;
    parts.reserve(heads.size());
    for (auto& ho : heads) parts.push_back(nn::matmul(ho.att, ho.hh));
    nn::Tensor mixed = parts.size() == 1 ? parts[0] : nn::concat_cols(parts);
    return nn::mul(nn::elu(mixed), row_mask(mask, cfg.d_h));
}

std::vector<nn::Tensor> gat_attention(const nn::Tensor& aligned, const Mask& mask,
                                      const GatLayer& gat, const EncoderConfig& cfg) {
    check_config(cfg);
    check_inputs(aligned, mask, cfg);
    std::vector<nn::Tensor> out;
    for (auto& ho : attention_heads(aligned, mask, gat, cfg)) out.push_back(std::move(ho.att));
    return out;
}

nn::Tensor readout(const nn::Tensor& h, const Mask& mask, bool mean_pool) {
    if (h.ndim() != 2 || h.rows() != mask.size())
        throw std::invalid_argument("readout: embeddings " + h.shape_str() + " vs mask size " +
                                    std::to_string(mask.size()));
    std::size_t true_count = 0;
    for (auto m : mask) true_count += m ? 1 : 0;
    if (true_count == 0) throw std::invalid_argument("readout: no true rows");
    if (!mean_pool) {
        if (!mask[0]) throw std::invalid_argument("readout: anchor row is masked out");
        return nn::slice_rows(h, 0, 1);
    }
    std::vector<double> w(mask.size(), 0.0);
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) w[i] = 1.0 / static_cast<double>(true_count);
    return nn::matmul(nn::Tensor::from({1, mask.size()}, std::move(w)), h);
}

std::vector<feat::Prepared> prepare_sequence(const tx::TemporalMultigraph& g,
                                             const walk::SubgraphSequence& seq) {
    std::vector<feat::Prepared> pres;
    pres.reserve(seq.subgraphs.size());
    for (std::size_t i = 0; i < seq.subgraphs.size(); ++i)
        pres.push_back(feat::prepare(g, seq.subgraphs[i], seq.intervals[i]));
    return pres;
}

SequenceFeature encode_prepared(const std::vector<feat::Prepared>& pres, const Encoder& encoder) {
    const EncoderConfig& cfg = encoder.cfg;
    if (pres.empty()) return {nn::Tensor::zeros({1, cfg.d_h}), 0};
    std::vector<nn::Tensor> rows;
    rows.reserve(pres.size());
    for (const feat::Prepared& pre : pres) {
        const nn::Tensor aligned = feat::align_tensor(pre, encoder.w_agg, cfg.n_max);
        Mask mask(cfg.n_max + 1, 0);
        for (std::size_t i = 0; i <= pre.n; ++i) mask[i] = 1;
        const nn::Tensor h = gat_forward(aligned, mask, encoder.gat, cfg);
        rows.push_back(readout(h, mask, cfg.mean_readout));
    }
    return {rows.size() == 1 ? rows[0] : nn::concat_rows(rows), pres.size()};
}

SequenceFeature encode_sequence(const tx::TemporalMultigraph& g, const walk::SubgraphSequence& seq,
                                const Encoder& encoder) {
    return encode_prepared(prepare_sequence(g, seq), encoder);
}

}  // namespace ssw::enc
