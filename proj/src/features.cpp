#include "ssw/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ssw/ops.hpp"

namespace ssw::feat {

namespace {

std::uint32_t far_endpoint(const walk::Subgraph& sg, const walk::SubEdge& e) {
    return e.from == sg.anchor ? e.to : e.from;
}

// [xf | xt | ef] without any processing
Matrix raw_rows(const NodeFeatures& nf, const Matrix& ef) {
    const std::size_t n = ef.rows;
    Matrix out(n, kInputCols);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < kValueCols; ++c) out.at(i, c) = nf.xf.at(i, c);
        for (std::size_t c = 0; c < kTimeCols; ++c) out.at(i, kValueCols + c) = nf.xt.at(i, c);
        for (std::size_t c = 0; c < kEdgeCols; ++c)
            out.at(i, kValueCols + kTimeCols + c) = ef.at(i, c);
    }
    return out;
}

}  // namespace

Matrix build_edge_features(const walk::Subgraph& sg, walk::Interval iv) {
    const std::size_t n = sg.edges.size();
    const double width = static_cast<double>(iv.t_hi - iv.t_lo);
    Matrix out(n, kEdgeCols);
    for (std::size_t i = 0; i < n; ++i) {
        const walk::SubEdge& e = sg.edges[i];
        out.at(i, 0) = tx::log_value(e.value);
        out.at(i, 1) = static_cast<double>(e.timestamp - iv.t_lo) / width;
        out.at(i, 2) = e.from == sg.anchor ? 1.0 : 0.0;
    }
    return out;
}

NodeFeatures build_node_features(const tx::TemporalMultigraph& g, const walk::Subgraph& sg,
                                 walk::Interval iv) {
    const std::size_t n = sg.edges.size();
    const double width = static_cast<double>(iv.t_hi - iv.t_lo);
    NodeFeatures out;
    out.xf = Matrix(n, kValueCols);
    out.xt = Matrix(n, kTimeCols);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t nb = far_endpoint(sg, sg.edges[i]);
        const auto hits = g.neighbors_in_window(nb, iv.t_lo, iv.t_hi, tx::Direction::both);
        if (hits.empty()) continue;  // unreachable for sampled edges; rows stay zero

        double in_eth = 0.0, out_eth = 0.0;
        for (const auto& h : hits) {
            const double eth = tx::value_eth(h.value);
            if (g.edge(h.edge).to == nb)
                in_eth += eth;
            else
                out_eth += eth;
        }
        out.xf.at(i, 0) = std::log10(1.0 + in_eth);
        out.xf.at(i, 1) = std::log10(1.0 + out_eth);
        out.xf.at(i, 2) = static_cast<double>(hits.size());

        const std::uint64_t first = hits.front().timestamp;
        const std::uint64_t last = hits.back().timestamp;
        out.xt.at(i, 0) = static_cast<double>(first - iv.t_lo) / width;
        out.xt.at(i, 1) = static_cast<double>(last - iv.t_lo) / width;
        out.xt.at(i, 2) = hits.size() >= 2 ? static_cast<double>(last - first) /
                                                 static_cast<double>(hits.size() - 1) / width
                                           : 0.0;
    }
    return out;
}

std::vector<double> aggregate(const double* w, std::size_t n, const Matrix& m) {
    std::vector<double> out(m.cols, 0.0);
    if (n == 0) return out;
    const std::vector<double> p = nn::softmax_values(w, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < m.cols; ++c) out[c] += p[i] * m.at(i, c);
    return out;
}

Matrix processed_rows(const NodeFeatures& nf, const Matrix& ef) {
    Matrix out = raw_rows(nf, ef);
    for (std::size_t c = 0; c < out.cols; ++c) {
        double lo = out.at(0, c), hi = out.at(0, c);
        for (std::size_t i = 1; i < out.rows; ++i) {
            lo = std::min(lo, out.at(i, c));
            hi = std::max(hi, out.at(i, c));
        }
        for (std::size_t i = 0; i < out.rows; ++i) {
            double v = hi > lo ? 2.0 * (out.at(i, c) - lo) / (hi - lo) - 1.0 : 0.0;
            out.at(i, c) = v >= 0.0 ? v : 0.01 * v;
        }
    }
    return out;
}

Matrix align_neighbors(const NodeFeatures& nf, const Matrix& ef, const double* w,
                       std::size_t n_max) {
    const std::size_t n = ef.rows;
    if (n > n_max)
        throw std::invalid_argument("align_neighbors: " + std::to_string(n) +
                                    " rows exceed n_max " + std::to_string(n_max));
    Matrix out(n_max + 1, kInputCols);
    if (n == 0) {
        out.at(0, 0) = 1.0;  // indicator row: empty subgraphs stay distinguishable
        return out;
    }
    const std::vector<double> anchor = aggregate(w, n, raw_rows(nf, ef));
    std::copy(anchor.begin(), anchor.end(), out.data.begin());
    const Matrix proc = processed_rows(nf, ef);
    std::copy(proc.data.begin(), proc.data.end(), out.data.begin() + kInputCols);
    return out;
}

Prepared prepare(const tx::TemporalMultigraph& g, const walk::Subgraph& sg, walk::Interval iv) {
    Prepared pre;
    const Matrix ef = build_edge_features(sg, iv);
    const NodeFeatures nf = build_node_features(g, sg, iv);
    pre.n = ef.rows;
    pre.raw = raw_rows(nf, ef);
    pre.processed = processed_rows(nf, ef);
    return pre;
}

nn::Tensor align_tensor(const Prepared& pre, const nn::Tensor& w, std::size_t n_max) {
    if (!w.defined() || w.ndim() != 2 || w.rows() != 1 || w.cols() != n_max)
        throw std::invalid_argument("align_tensor: weights must be 1x" + std::to_string(n_max));
    const std::size_t n = pre.n;
    if (n > n_max)
        throw std::invalid_argument("align_tensor: " + std::to_string(n) + " rows exceed n_max " +
                                    std::to_string(n_max));
    if (n == 0) {
        nn::Tensor out = nn::Tensor::zeros({n_max + 1, kInputCols});
        out.data()[0] = 1.0;
        return out;
    }
    nn::Tensor raw = nn::Tensor::from({n, kInputCols}, pre.raw.data);
    nn::Tensor anchor = nn::matmul(nn::softmax(nn::slice_cols(w, 0, n)), raw);
    std::vector<nn::Tensor> parts{anchor, nn::Tensor::from({n, kInputCols}, pre.processed.data)};
    if (n < n_max) parts.push_back(nn::Tensor::zeros({n_max - n, kInputCols}));
    return nn::concat_rows(parts);
}

}  // namespace ssw::feat
