#include "ssw/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ssw/kernels.hpp"

namespace ssw::nn {

namespace {

bool tracking(std::initializer_list<const Tensor*> inputs) {
    if (!Tape::current()) return false;
    for (const Tensor* t : inputs)
        if (t->defined() && t->requires_grad()) return true;
    return false;
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    require(a.shape() == b.shape(),
            std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

std::size_t rows2d(const Tensor& t) { return t.ndim() == 1 ? 1 : t.dim(0); }
std::size_t cols2d(const Tensor& t) { return t.ndim() == 1 ? t.dim(0) : t.dim(1); }

void require_2d(const char* op, const Tensor& t) {
    require(t.ndim() <= 2, std::string(op) + ": expects a 1D/2D tensor, got " + t.shape_str());
}

}  // namespace

std::vector<double> softmax_values(const double* x, std::size_t n) {
    std::vector<double> y(n);
    const double m = kern::vmax(x, n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = std::exp(x[i] - m);
        total += y[i];
    }
    for (auto& v : y) v /= total;
    return y;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_2d("matmul", a);
    require_2d("matmul", b);
    const std::size_t m = rows2d(a), k = cols2d(a), k2 = rows2d(b), n = cols2d(b);
    require(k == k2, "matmul: inner dimensions differ, " + a.shape_str() + " vs " + b.shape_str());
    Tensor out = Tensor::zeros({m, n});
    kern::matmul_nn(a.data(), b.data(), out.data(), m, k, n);
    if (tracking({&a, &b})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        Tape::current()->record([ai, bi, oi, m, k, n] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (ai->requires_grad)
                kern::matmul_nt(g, bi->data.data(), accum_grad(ai), m, n, k);
            if (bi->requires_grad)
                kern::matmul_tn(ai->data.data(), g, accum_grad(bi), k, m, n);
        });
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    require_2d("transpose", a);
    const std::size_t r = rows2d(a), c = cols2d(a);
    Tensor out = Tensor::zeros({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.data()[j * r + i] = a.data()[i * c + j];
    if (tracking({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        Tape::current()->record([ai, oi, r, c] {
            if (oi->grad.empty() || !ai->requires_grad) return;
            double* ga = accum_grad(ai);
            const double* go = oi->grad.data();
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += go[j * r + i];
        });
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape("add", a, b);
    Tensor out = Tensor::zeros(a.shape());
    kern::vadd(a.data(), b.data(), out.data(), a.size());
    if (tracking({&a, &b})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        Tape::current()->record([ai, bi, oi] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            const std::size_t n = oi->grad.size();
            if (ai->requires_grad) kern::axpy(1.0, g, accum_grad(ai), n);
            if (bi->requires_grad) kern::axpy(1.0, g, accum_grad(bi), n);
        });
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape("sub", a, b);
    Tensor out = Tensor::zeros(a.shape());
    kern::vsub(a.data(), b.data(), out.data(), a.size());
    if (tracking({&a, &b})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        Tape::current()->record([ai, bi, oi] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            const std::size_t n = oi->grad.size();
            if (ai->requires_grad) kern::axpy(1.0, g, accum_grad(ai), n);
            if (bi->requires_grad) kern::axpy(-1.0, g, accum_grad(bi), n);
        });
    }
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape("mul", a, b);
    Tensor out = Tensor::zeros(a.shape());
    kern::vmul(a.data(), b.data(), out.data(), a.size());
    if (tracking({&a, &b})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), bi = b.impl(), oi = out.impl();
        Tape::current()->record([ai, bi, oi] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            const std::size_t n = oi->grad.size();
            if (ai->requires_grad) {
                double* ga = accum_grad(ai);
                const double* bv = bi->data.data();
                for (std::size_t i = 0; i < n; ++i) ga[i] += g[i] * bv[i];
            }
            if (bi->requires_grad) {
                double* gb = accum_grad(bi);
                const double* av = ai->data.data();
                for (std::size_t i = 0; i < n; ++i) gb[i] += g[i] * av[i];
            }
        });
    }
    return out;
}

Tensor scale(const Tensor& a, double s) {
    Tensor out = Tensor::zeros(a.shape());
    kern::vscale(a.data(), s, out.data(), a.size());
    if (tracking({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        Tape::current()->record([ai, oi, s] {
            if (oi->grad.empty() || !ai->requires_grad) return;
            kern::axpy(s, oi->grad.data(), accum_grad(ai), oi->grad.size());
        });
    }
    return out;
}

Tensor sum(const Tensor& a) {
    Tensor out = Tensor::scalar(kern::vsum(a.data(), a.size()));
    if (tracking({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        Tape::current()->record([ai, oi] {
            if (oi->grad.empty() || !ai->requires_grad) return;
            const double g = oi->grad[0];
            double* ga = accum_grad(ai);
            for (std::size_t i = 0; i < ai->data.size(); ++i) ga[i] += g;
        });
    }
    return out;
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Tensor softmax(const Tensor& a, int axis) {
    const int nd = static_cast<int>(a.ndim());
    if (axis < 0) axis += nd;
    require(axis >= 0 && axis < nd, "softmax: invalid axis for shape " + a.shape_str());
    const std::size_t k = a.dim(static_cast<std::size_t>(axis));
    std::size_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= a.dim(static_cast<std::size_t>(i));
    for (int i = axis + 1; i < nd; ++i) inner *= a.dim(static_cast<std::size_t>(i));

    Tensor out = Tensor::zeros(a.shape());
    std::vector<double> buf(k);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * k * inner + in;
            for (std::size_t j = 0; j < k; ++j) buf[j] = a.data()[base + j * inner];
            std::vector<double> y = softmax_values(buf.data(), k);
            for (std::size_t j = 0; j < k; ++j) out.data()[base + j * inner] = y[j];
        }
    }
    if (tracking({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        Tape::current()->record([ai, oi, outer, inner, k] {
            if (oi->grad.empty() || !ai->requires_grad) return;
            double* ga = accum_grad(ai);
            const double* g = oi->grad.data();
            const double* y = oi->data.data();
            for (std::size_t o = 0; o < outer; ++o) {
                for (std::size_t in = 0; in < inner; ++in) {
                    const std::size_t base = o * k * inner + in;
                    double s = 0.0;
                    for (std::size_t j = 0; j < k; ++j) {
                        const std::size_t idx = base + j * inner;
                        s += g[idx] * y[idx];
                    }
                    for (std::size_t j = 0; j < k; ++j) {
                        const std::size_t idx = base + j * inner;
                        ga[idx] += y[idx] * (g[idx] - s);
                    }
                }
            }
        });
    }
    return out;
}

Tensor leaky_relu(const Tensor& a, double slope) {
    require(slope > 0.0 && slope < 1.0, "leaky_relu: slope must be in (0,1)");
    Tensor out = Tensor::zeros(a.shape());
    kern::leaky_relu(a.data(), slope, out.data(), a.size());
    if (tracking({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        Tape::current()->record([ai, oi, slope] {
            if (oi->grad.empty() || !ai->requires_grad) return;
            double* ga = accum_grad(ai);
            const double* g = oi->grad.data();
            const double* x = ai->data.data();
            for (std::size_t i = 0; i < ai->data.size(); ++i)
                ga[i] += g[i] * (x[i] > 0.0 ? 1.0 : slope);
        });
    }
    return out;
}

Tensor elu(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a.data()[i];
        out.data()[i] = x > 0.0 ? x : std::expm1(x);
    }
    if (tracking({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        Tape::current()->record([ai, oi] {
            if (oi->grad.empty() || !ai->requires_grad) return;
            double* ga = accum_grad(ai);
            const double* g = oi->grad.data();
            const double* x = ai->data.data();
            const double* y = oi->data.data();
            for (std::size_t i = 0; i < ai->data.size(); ++i)
                ga[i] += g[i] * (x[i] > 0.0 ? 1.0 : y[i] + 1.0);
        });
    }
    return out;
}

Tensor gelu(const Tensor& a) {
    constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    constexpr double inv_sqrt_2pi = 0.3989422804014327;  // 1/sqrt(2*pi)
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = a.data()[i];
        out.data()[i] = 0.5 * x * (1.0 + std::erf(x * inv_sqrt2));
    }
    if (tracking({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        Tape::current()->record([ai, oi] {
            if (oi->grad.empty() || !ai->requires_grad) return;
            double* ga = accum_grad(ai);
            const double* g = oi->grad.data();
            const double* x = ai->data.data();
            for (std::size_t i = 0; i < ai->data.size(); ++i) {
                const double cdf = 0.5 * (1.0 + std::erf(x[i] * inv_sqrt2));
                const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x[i] * x[i]);
                ga[i] += g[i] * (cdf + x[i] * pdf);
            }
        });
    }
    return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    require_2d("layer_norm", x);
    const std::size_t r = rows2d(x), d = cols2d(x);
    require(gamma.size() == d && beta.size() == d,
            "layer_norm: gamma/beta " + gamma.shape_str() + "/" + beta.shape_str() +
                " do not match row width of " + x.shape_str());
    Tensor out = Tensor::zeros(x.shape());
    std::vector<double> xhat(r * d), inv(r);
    for (std::size_t i = 0; i < r; ++i) {
        const double* row = x.data() + i * d;
        double mu = kern::vsum(row, d) / static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double c = row[j] - mu;
            var += c * c;
        }
        var /= static_cast<double>(d);
        const double iv = 1.0 / std::sqrt(var + eps);
        inv[i] = iv;
        for (std::size_t j = 0; j < d; ++j) {
            const double h = (row[j] - mu) * iv;
            xhat[i * d + j] = h;
            out.data()[i * d + j] = gamma.data()[j] * h + beta.data()[j];
        }
    }
    if (tracking({&x, &gamma, &beta})) {
        out.set_requires_grad(true);
        auto xi = x.impl(), gi = gamma.impl(), bi = beta.impl(), oi = out.impl();
        Tape::current()->record([xi, gi, bi, oi, r, d, xhat = std::move(xhat),
                                 inv = std::move(inv)] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (bi->requires_grad) {
                double* gb = accum_grad(bi);
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < d; ++j) gb[j] += g[i * d + j];
            }
            if (gi->requires_grad) {
                double* gg = accum_grad(gi);
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < d; ++j) gg[j] += g[i * d + j] * xhat[i * d + j];
            }
            if (xi->requires_grad) {
                double* gx = accum_grad(xi);
                const double* gam = gi->data.data();
                for (std::size_t i = 0; i < r; ++i) {
                    double s1 = 0.0, s2 = 0.0;
                    for (std::size_t j = 0; j < d; ++j) {
                        const double dg = g[i * d + j] * gam[j];
                        s1 += dg;
                        s2 += dg * xhat[i * d + j];
                    }
                    s1 /= static_cast<double>(d);
                    s2 /= static_cast<double>(d);
                    for (std::size_t j = 0; j < d; ++j) {
                        const double dg = g[i * d + j] * gam[j];
                        gx[i * d + j] += inv[i] * (dg - s1 - xhat[i * d + j] * s2);
                    }
                }
            }
        });
    }
    return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    require_2d("linear", x);
    require_2d("linear", w);
    const std::size_t m = rows2d(x), k = cols2d(x), k2 = rows2d(w), n = cols2d(w);
    require(k == k2, "linear: input/weight mismatch " + x.shape_str() + " vs " + w.shape_str());
    if (b.defined())
        require(b.size() == n, "linear: bias " + b.shape_str() + " does not match " + w.shape_str());
    Tensor out = Tensor::zeros({m, n});
    kern::matmul_nn(x.data(), w.data(), out.data(), m, k, n);
    if (b.defined())
        for (std::size_t i = 0; i < m; ++i) kern::axpy(1.0, b.data(), out.data() + i * n, n);
    if (tracking({&x, &w, &b})) {
        out.set_requires_grad(true);
        auto xi = x.impl(), wi = w.impl(), oi = out.impl();
        auto bi = b.defined() ? b.impl() : nullptr;
        Tape::current()->record([xi, wi, bi, oi, m, k, n] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (xi->requires_grad) kern::matmul_nt(g, wi->data.data(), accum_grad(xi), m, n, k);
            if (wi->requires_grad) kern::matmul_tn(xi->data.data(), g, accum_grad(wi), k, m, n);
            if (bi && bi->requires_grad) {
                double* gb = accum_grad(bi);
                for (std::size_t i = 0; i < m; ++i) kern::axpy(1.0, g + i * n, gb, n);
            }
        });
    }
    return out;
}

Tensor dropout(const Tensor& x, double p, Rng& rng, bool training) {
    require(p >= 0.0 && p < 1.0, "dropout: p must be in [0,1)");
    if (!training || p == 0.0) return x;
    const double keep_scale = 1.0 / (1.0 - p);
    std::vector<double> mask(x.size());
    for (auto& m : mask) m = rng.uniform() < p ? 0.0 : keep_scale;
    Tensor out = Tensor::zeros(x.shape());
    kern::vmul(x.data(), mask.data(), out.data(), x.size());
    if (tracking({&x})) {
        out.set_requires_grad(true);
        auto xi = x.impl(), oi = out.impl();
        Tape::current()->record([xi, oi, mask = std::move(mask)] {
            if (oi->grad.empty() || !xi->requires_grad) return;
            double* gx = accum_grad(xi);
            const double* g = oi->grad.data();
            for (std::size_t i = 0; i < xi->data.size(); ++i) gx[i] += g[i] * mask[i];
        });
    }
    return out;
}

Tensor cross_entropy(const Tensor& logits, std::size_t label, double weight) {
    require(rows2d(logits) == 1, "cross_entropy: expects a single logit row, got " + logits.shape_str());
    const std::size_t c = cols2d(logits);
    require(label < c, "cross_entropy: label out of range for " + logits.shape_str());
    std::vector<double> probs = softmax_values(logits.data(), c);
    const double m = kern::vmax(logits.data(), c);
    double lse = 0.0;
    for (std::size_t j = 0; j < c; ++j) lse += std::exp(logits.data()[j] - m);
    lse = m + std::log(lse);
    Tensor out = Tensor::scalar(weight * (lse - logits.data()[label]));
    if (tracking({&logits})) {
        out.set_requires_grad(true);
        auto li = logits.impl(), oi = out.impl();
        Tape::current()->record([li, oi, label, weight, probs = std::move(probs)] {
            if (oi->grad.empty() || !li->requires_grad) return;
            const double g = oi->grad[0] * weight;
            double* gl = accum_grad(li);
            for (std::size_t j = 0; j < probs.size(); ++j)
                gl[j] += g * (probs[j] - (j == label ? 1.0 : 0.0));
        });
    }
    return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat_rows: no inputs");
    const std::size_t c = cols2d(parts[0]);
    std::size_t r = 0;
    for (const Tensor& p : parts) {
        require_2d("concat_rows", p);
        require(cols2d(p) == c, "concat_rows: column mismatch " + parts[0].shape_str() + " vs " +
                                    p.shape_str());
        r += rows2d(p);
    }
    Tensor out = Tensor::zeros({r, c});
    std::size_t row = 0;
    for (const Tensor& p : parts) {
        std::copy(p.data(), p.data() + p.size(), out.data() + row * c);
        row += rows2d(p);
    }
    bool track = false;
    for (const Tensor& p : parts) track = track || (Tape::current() && p.requires_grad());
    if (track) {
        out.set_requires_grad(true);
        std::vector<std::shared_ptr<TensorImpl>> impls;
        impls.reserve(parts.size());
        for (const Tensor& p : parts) impls.push_back(p.impl());
        auto oi = out.impl();
        Tape::current()->record([impls = std::move(impls), oi, c] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            std::size_t offset = 0;
            for (const auto& pi : impls) {
                const std::size_t len = pi->data.size();
                if (pi->requires_grad) kern::axpy(1.0, g + offset, accum_grad(pi), len);
                offset += len;
            }
        });
    }
    return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    require(!parts.empty(), "concat_cols: no inputs");
    const std::size_t r = rows2d(parts[0]);
    std::size_t c = 0;
    for (const Tensor& p : parts) {
        require_2d("concat_cols", p);
        require(rows2d(p) == r,
                "concat_cols: row mismatch " + parts[0].shape_str() + " vs " + p.shape_str());
        c += cols2d(p);
    }
    Tensor out = Tensor::zeros({r, c});
    std::size_t col = 0;
    for (const Tensor& p : parts) {
        const std::size_t pc = cols2d(p);
        for (std::size_t i = 0; i < r; ++i)
            std::copy(p.data() + i * pc, p.data() + (i + 1) * pc, out.data() + i * c + col);
        col += pc;
    }
    bool track = false;
    for (const Tensor& p : parts) track = track || (Tape::current() && p.requires_grad());
    if (track) {
        out.set_requires_grad(true);
        std::vector<std::shared_ptr<TensorImpl>> impls;
        std::vector<std::size_t> widths;
        for (const Tensor& p : parts) {
            impls.push_back(p.impl());
            widths.push_back(cols2d(p));
        }
        auto oi = out.impl();
        Tape::current()->record([impls = std::move(impls), widths = std::move(widths), oi, r, c] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            std::size_t col = 0;
            for (std::size_t p = 0; p < impls.size(); ++p) {
                const std::size_t pc = widths[p];
                if (impls[p]->requires_grad) {
                    double* gp = accum_grad(impls[p]);
                    for (std::size_t i = 0; i < r; ++i)
                        kern::axpy(1.0, g + i * c + col, gp + i * pc, pc);
                }
                col += pc;
            }
        });
    }
    return out;
}

Tensor slice_rows(const Tensor& a, std::size_t r0, std::size_t r1) {
    require_2d("slice_rows", a);
    const std::size_t r = rows2d(a), c = cols2d(a);
    require(r0 < r1 && r1 <= r, "slice_rows: bad range for " + a.shape_str());
    Tensor out = Tensor::zeros({r1 - r0, c});
    std::copy(a.data() + r0 * c, a.data() + r1 * c, out.data());
    if (tracking({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        Tape::current()->record([ai, oi, r0, c] {
            if (oi->grad.empty() || !ai->requires_grad) return;
            kern::axpy(1.0, oi->grad.data(), accum_grad(ai) + r0 * c, oi->grad.size());
        });
    }
    return out;
}

Tensor slice_cols(const Tensor& a, std::size_t c0, std::size_t c1) {
    require_2d("slice_cols", a);
    const std::size_t r = rows2d(a), c = cols2d(a);
    require(c0 < c1 && c1 <= c, "slice_cols: bad range for " + a.shape_str());
    const std::size_t w = c1 - c0;
    Tensor out = Tensor::zeros({r, w});
    for (std::size_t i = 0; i < r; ++i)
        std::copy(a.data() + i * c + c0, a.data() + i * c + c1, out.data() + i * w);
    if (tracking({&a})) {
        out.set_requires_grad(true);
        auto ai = a.impl(), oi = out.impl();
        Tape::current()->record([ai, oi, r, c, c0, w] {
            if (oi->grad.empty() || !ai->requires_grad) return;
            double* ga = accum_grad(ai);
            const double* g = oi->grad.data();
            for (std::size_t i = 0; i < r; ++i) kern::axpy(1.0, g + i * w, ga + i * c + c0, w);
        });
    }
    return out;
}

Tensor outer_add(const Tensor& col, const Tensor& row) {
    require(col.ndim() == 1 || cols2d(col) == 1,
            "outer_add: col must be a vector, got " + col.shape_str());
    require(row.ndim() == 1 || cols2d(row) == 1,
            "outer_add: row must be a vector, got " + row.shape_str());
    const std::size_t t = col.size(), s = row.size();
    Tensor out = Tensor::zeros({t, s});
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = 0; j < s; ++j) out.data()[i * s + j] = col.data()[i] + row.data()[j];
    if (tracking({&col, &row})) {
        out.set_requires_grad(true);
        auto ci = col.impl(), ri = row.impl(), oi = out.impl();
        Tape::current()->record([ci, ri, oi, t, s] {
            if (oi->grad.empty()) return;
            const double* g = oi->grad.data();
            if (ci->requires_grad) {
                double* gc = accum_grad(ci);
                for (std::size_t i = 0; i < t; ++i) gc[i] += kern::vsum(g + i * s, s);
            }
            if (ri->requires_grad) {
                double* gr = accum_grad(ri);
                for (std::size_t i = 0; i < t; ++i) kern::axpy(1.0, g + i * s, gr, s);
            }
        });
    }
    return out;
}

}  // namespace ssw::nn
