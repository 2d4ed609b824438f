#include "ssw/seqmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ssw/errors.hpp"
#include "ssw/hash.hpp"
#include "ssw/ops.hpp"
#include "ssw/rng.hpp"

namespace ssw::seq {

namespace {

nn::Tensor xavier(std::size_t fin, std::size_t fout, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fin + fout));
    return nn::Tensor::randu({fin, fout}, rng, -limit, limit, true);
}

// -1e30 on masked key columns: exactly zero weight after softmax
nn::Tensor key_bias(const Mask& mask) {
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

nn::Tensor positional_encoding(std::size_t t, std::size_t d) {
    std::vector<double> pe(t * d, 0.0);
    for (std::size_t pos = 0; pos < t; ++pos)
        for (std::size_t i = 0; i < d; ++i) {
            const double exponent = static_cast<double>(i - i % 2) / static_cast<double>(d);
            const double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
            pe[pos * d + i] = i % 2 == 0 ? std::sin(angle) : std::cos(angle);
        }
    return nn::Tensor::from({t, d}, std::move(pe));
}

void check_block_inputs(const nn::Tensor& x, const Mask& mask, std::size_t d) {
    if (x.ndim() != 2 || x.cols() != d)
        throw std::invalid_argument("attention_block: tokens " + x.shape_str() +
                                    " do not have width " + std::to_string(d));
    if (mask.size() != x.rows())
        throw std::invalid_argument("attention_block: mask size " + std::to_string(mask.size()) +
                                    " != " + std::to_string(x.rows()) + " tokens");
    if (std::find(mask.begin(), mask.end(), 1) == mask.end())
        throw std::invalid_argument("attention_block: all positions masked");
}

struct AttnParts {
    nn::Tensor att, v;
};

AttnParts attn_parts(const nn::Tensor& x, const Mask& mask, const Block& blk, std::size_t d) {
    const nn::Tensor xn = nn::layer_norm(x, blk.ln1_g, blk.ln1_b);
    const nn::Tensor q = nn::matmul(xn, blk.wq);
    const nn::Tensor k = nn::matmul(xn, blk.wk);
    nn::Tensor v = nn::matmul(xn, blk.wv);
    const nn::Tensor scores =
        nn::scale(nn::matmul(q, nn::transpose(k)), 1.0 / std::sqrt(static_cast<double>(d)));
    return {nn::softmax(nn::add(scores, key_bias(mask))), std::move(v)};
}

void check_padded(const SeqModel& m, const Padded& p) {
    if (p.phi.ndim() != 2 || p.phi.rows() != m.cfg.m_max || p.phi.cols() != m.cfg.d_phi)
        throw std::invalid_argument("forward: Phi " + p.phi.shape_str() + ", expected (" +
                                    std::to_string(m.cfg.m_max) + "x" +
                                    std::to_string(m.cfg.d_phi) + ")");
    if (p.mask.size() != m.cfg.m_max)
        throw std::invalid_argument("forward: mask size " + std::to_string(p.mask.size()));
    if (std::find(p.mask.begin(), p.mask.end(), 1) == p.mask.end())
        throw std::invalid_argument("forward: no true rows");
}

}  // namespace

nlohmann::json config_json(const SeqConfig& cfg) {
    return {{"d_model", cfg.d_model},   {"d_phi", cfg.d_phi},
            {"m_max", cfg.m_max},       {"blocks", cfg.blocks},
            {"n_classes", cfg.n_classes}, {"transposed", cfg.transposed},
            {"seed", hex_u64(cfg.seed)}};
}

SeqConfig config_from_json(const nlohmann::json& j) {
    SeqConfig cfg;
    try {
        cfg.d_model = j.at("d_model").get<std::size_t>();
        cfg.d_phi = j.at("d_phi").get<std::size_t>();
        cfg.m_max = j.at("m_max").get<std::size_t>();
        cfg.blocks = j.at("blocks").get<std::size_t>();
        cfg.n_classes = j.at("n_classes").get<std::size_t>();
        cfg.transposed = j.at("transposed").get<bool>();
        cfg.seed = std::stoull(j.at("seed").get<std::string>(), nullptr, 16);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model config: ") + e.what());
    } catch (const std::logic_error&) {
        throw DataError("model config: bad seed field");
    }
    if (cfg.d_model == 0 || cfg.d_phi == 0 || cfg.m_max == 0 || cfg.blocks == 0 ||
        cfg.n_classes < 2)
        throw DataError("model config: dimensions must be positive, n_classes >= 2");
    return cfg;
}

SeqModel make_seqmodel(const SeqConfig& cfg) {
    if (cfg.d_model == 0 || cfg.d_phi == 0 || cfg.m_max == 0 || cfg.blocks == 0 ||
        cfg.n_classes < 2)
        throw std::invalid_argument("make_seqmodel: dimensions must be positive, n_classes >= 2");
    Rng rng(cfg.seed);
    const std::size_t d = cfg.d_model;
    SeqModel m;
    m.cfg = cfg;
    m.channel_embed = xavier(cfg.m_max, d, rng);
    m.input_proj = xavier(cfg.d_phi, d, rng);
    m.blocks.resize(cfg.blocks);
    for (Block& b : m.blocks) {
        b.ln1_g = nn::Tensor::full({d}, 1.0, true);
        b.ln1_b = nn::Tensor::zeros({d}, true);
        b.wq = xavier(d, d, rng);
        b.wk = xavier(d, d, rng);
        b.wv = xavier(d, d, rng);
        b.ln2_g = nn::Tensor::full({d}, 1.0, true);
        b.ln2_b = nn::Tensor::zeros({d}, true);
        b.w1 = xavier(d, 4 * d, rng);
        b.b1 = nn::Tensor::zeros({4 * d}, true);
        b.w2 = xavier(4 * d, d, rng);
        b.b2 = nn::Tensor::zeros({d}, true);
    }
    m.agg = nn::Tensor::full({1, cfg.d_phi}, 1.0 / static_cast<double>(cfg.d_phi), true);
    m.p1 = xavier(d, d, rng);
    m.pb1 = nn::Tensor::zeros({d}, true);
    m.p2 = xavier(d, cfg.n_classes, rng);
    m.pb2 = nn::Tensor::zeros({cfg.n_classes}, true);
    return m;
}

std::vector<std::pair<std::string, nn::Tensor>> SeqModel::named_parameters() const {
    std::vector<std::pair<std::string, nn::Tensor>> out;
    if (cfg.transposed)
        out.emplace_back("channel_embed", channel_embed);
    else
        out.emplace_back("input_proj", input_proj);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const Block& b = blocks[i];
        const std::string p = "block" + std::to_string(i) + ".";
        out.emplace_back(p + "ln1_g", b.ln1_g);
        out.emplace_back(p + "ln1_b", b.ln1_b);
        out.emplace_back(p + "wq", b.wq);
        out.emplace_back(p + "wk", b.wk);
        out.emplace_back(p + "wv", b.wv);
        out.emplace_back(p + "ln2_g", b.ln2_g);
        out.emplace_back(p + "ln2_b", b.ln2_b);
        out.emplace_back(p + "w1", b.w1);
        out.emplace_back(p + "b1", b.b1);
        out.emplace_back(p + "w2", b.w2);
        out.emplace_back(p + "b2", b.b2);
    }
    if (cfg.transposed) out.emplace_back("agg", agg);
    out.emplace_back("p1", p1);
    out.emplace_back("pb1", pb1);
    out.emplace_back("p2", p2);
    out.emplace_back("pb2", pb2);
    return out;
}

std::vector<nn::Tensor> SeqModel::parameters() const {
    std::vector<nn::Tensor> out;
    for (auto& [name, t] : named_parameters()) out.push_back(t);
    return out;
}

Padded pad_sequence(const enc::SequenceFeature& sf, std::size_t m_max) {
    if (m_max == 0) throw std::invalid_argument("pad_sequence: m_max must be positive");
    const std::size_t d = sf.phi.cols();
    Padded out;
    out.mask.assign(m_max, 0);
    if (sf.true_len == 0) {
        out.phi = nn::Tensor::zeros({m_max, d});
        out.mask[0] = 1;  // degenerate: one zero row marked true
        return out;
    }
    if (sf.phi.rows() != sf.true_len)
        throw std::invalid_argument("pad_sequence: Phi has " + std::to_string(sf.phi.rows()) +
                                    " rows, true_len " + std::to_string(sf.true_len));
    const std::size_t m = std::min(sf.true_len, m_max);
    nn::Tensor kept =
        m == sf.true_len ? sf.phi : nn::slice_rows(sf.phi, sf.true_len - m, sf.true_len);
    out.phi = m == m_max ? kept : nn::concat_rows({kept, nn::Tensor::zeros({m_max - m, d})});
    std::fill_n(out.mask.begin(), m, 1);
    return out;
}

nn::Tensor attention_block(const nn::Tensor& x, const Mask& mask, const Block& blk,
                           std::size_t d) {
    check_block_inputs(x, mask, d);
    AttnParts parts = attn_parts(x, mask, blk, d);
    const nn::Tensor x1 = nn::add(x, nn::matmul(parts.att, parts.v));
    const nn::Tensor x2 = nn::layer_norm(x1, blk.ln2_g, blk.ln2_b);
    const nn::Tensor ff = nn::linear(nn::gelu(nn::linear(x2, blk.w1, blk.b1)), blk.w2, blk.b2);
    return nn::add(x1, ff);
}

nn::Tensor block_attention(const nn::Tensor& x, const Mask& mask, const Block& blk,
                           std::size_t d) {
    check_block_inputs(x, mask, d);
    return attn_parts(x, mask, blk, d).att;
}

nn::Tensor token_states(const SeqModel& m, const Padded& p) {
    check_padded(m, p);
    const nn::Tensor masked = nn::mul(p.phi, row_mask(p.mask, m.cfg.d_phi));
    nn::Tensor tokens;
    Mask token_mask;
    if (m.cfg.transposed) {
        tokens = nn::matmul(nn::transpose(masked), m.channel_embed);
        token_mask.assign(m.cfg.d_phi, 1);  // channels are never padded
    } else {
        tokens = nn::add(nn::matmul(masked, m.input_proj),
                         positional_encoding(m.cfg.m_max, m.cfg.d_model));
        token_mask = p.mask;
    }
    for (const Block& blk : m.blocks)
        tokens = attention_block(tokens, token_mask, blk, m.cfg.d_model);
    return tokens;
}

nn::Tensor head_logits(const SeqModel& m, const nn::Tensor& pooled) {
    return nn::linear(nn::gelu(nn::linear(pooled, m.p1, m.pb1)), m.p2, m.pb2);
}

nn::Tensor forward_transposed(const SeqModel& m, const Padded& p) {
    if (!m.cfg.transposed) throw std::invalid_argument("forward_transposed: model is conventional");
    return head_logits(m, nn::matmul(m.agg, token_states(m, p)));
}

nn::Tensor forward_conventional(const SeqModel& m, const Padded& p) {
    if (m.cfg.transposed) throw std::invalid_argument("forward_conventional: model is transposed");
    const nn::Tensor tokens = token_states(m, p);
    std::size_t true_count = 0;
    for (auto v : p.mask) true_count += v ? 1 : 0;
    std::vector<double> w(p.mask.size(), 0.0);
    for (std::size_t i = 0; i < p.mask.size(); ++i)
        if (p.mask[i]) w[i] = 1.0 / static_cast<double>(true_count);
    const nn::Tensor pooled = nn::matmul(nn::Tensor::from({1, p.mask.size()}, std::move(w)), tokens);
    return head_logits(m, pooled);
}

nn::Tensor forward(const SeqModel& m, const Padded& p) {
    return m.cfg.transposed ? forward_transposed(m, p) : forward_conventional(m, p);
}

Prediction predict(const SeqModel& m, const enc::SequenceFeature& sf) {
    if (sf.phi.cols() != m.cfg.d_phi)
        throw std::invalid_argument("predict: sequence width " + std::to_string(sf.phi.cols()) +
                                    " != model d_phi " + std::to_string(m.cfg.d_phi));
    const nn::Tensor logits = forward(m, pad_sequence(sf, m.cfg.m_max));
    Prediction out;
    out.probs = nn::softmax_values(logits.data(), logits.size());
    out.cls = static_cast<std::size_t>(
        std::max_element(out.probs.begin(), out.probs.end()) - out.probs.begin());
    return out;
}

}  // namespace ssw::seq
