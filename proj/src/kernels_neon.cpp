// NEON (aarch64) kernel variants, two f64 lanes per vector. Mirrors the
// AVX2 file; see the bit-identity notes there.

#include "ssw/kernels.hpp"

#if defined(SSW_HAVE_NEON)

#include <arm_neon.h>

#include <cmath>

namespace ssw::kern::detail {
namespace {

inline double hsum(float64x2_t v) { return vgetq_lane_f64(v, 0) + vgetq_lane_f64(v, 1); }

void axpy_v(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        vy = vaddq_f64(vy, vmulq_f64(va, vld1q_f64(x + i)));
        vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void vadd_v(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    for (; i < n; ++i) out[i] = x[i] + y[i];
}

void vsub_v(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    for (; i < n; ++i) out[i] = x[i] - y[i];
}

void vmul_v(const double* x, const double* y, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    for (; i < n; ++i) out[i] = x[i] * y[i];
}

void vscale_v(const double* x, double s, double* out, std::size_t n) {
    const float64x2_t vs = vdupq_n_f64(s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vs, vld1q_f64(x + i)));
    for (; i < n; ++i) out[i] = s * x[i];
}

void leaky_relu_v(const double* x, double slope, double* out, std::size_t n) {
    const float64x2_t vs = vdupq_n_f64(slope);
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vx = vld1q_f64(x + i);
        float64x2_t neg = vmulq_f64(vs, vx);
        uint64x2_t mask = vcgtq_f64(vx, zero);
        vst1q_f64(out + i, vbslq_f64(mask, vx, neg));
    }
    for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

double dot_v(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double vsum_v(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double vmax_v(const double* x, std::size_t n) {
    double m = x[0];
    std::size_t i = 0;
    if (n >= 2) {
        float64x2_t acc = vld1q_f64(x);
        for (i = 2; i + 2 <= n; i += 2) acc = vmaxq_f64(acc, vld1q_f64(x + i));
        double a0 = vgetq_lane_f64(acc, 0), a1 = vgetq_lane_f64(acc, 1);
        m = a0 > a1 ? a0 : a1;
    }
    for (; i < n; ++i) m = x[i] > m ? x[i] : m;
    return m;
}

void matmul_nn_v(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double s = a[i * k + p];
            const float64x2_t aip = vdupq_n_f64(s);
            const double* brow = b + p * n;
            std::size_t j = 0;
            for (; j + 2 <= n; j += 2)
                vst1q_f64(crow + j, vfmaq_f64(vld1q_f64(crow + j), aip, vld1q_f64(brow + j)));
            for (; j < n; ++j) crow[j] += s * brow[j];
        }
    }
}

void matmul_nt_v(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] += dot_v(arow, b + j * k, k);
    }
}

void matmul_tn_v(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double s = arow[i];
            const float64x2_t api = vdupq_n_f64(s);
            double* crow = c + i * n;
            std::size_t j = 0;
            for (; j + 2 <= n; j += 2)
                vst1q_f64(crow + j, vfmaq_f64(vld1q_f64(crow + j), api, vld1q_f64(brow + j)));
            for (; j < n; ++j) crow[j] += s * brow[j];
        }
    }
}

void adam_step_v(double* p, const double* g, double* m, double* v, std::size_t n,
                 double lr, double b1, double b2, double bc1, double bc2, double eps) {
    const float64x2_t vb1 = vdupq_n_f64(b1);
    const float64x2_t vb2 = vdupq_n_f64(b2);
    const float64x2_t vob1 = vdupq_n_f64(1.0 - b1);
    const float64x2_t vob2 = vdupq_n_f64(1.0 - b2);
    const float64x2_t vbc1 = vdupq_n_f64(bc1);
    const float64x2_t vbc2 = vdupq_n_f64(bc2);
    const float64x2_t vlr = vdupq_n_f64(lr);
    const float64x2_t veps = vdupq_n_f64(eps);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vg = vld1q_f64(g + i);
        float64x2_t vm = vaddq_f64(vmulq_f64(vb1, vld1q_f64(m + i)), vmulq_f64(vob1, vg));
        float64x2_t vv = vaddq_f64(vmulq_f64(vb2, vld1q_f64(v + i)),
                                   vmulq_f64(vmulq_f64(vob2, vg), vg));
        vst1q_f64(m + i, vm);
        vst1q_f64(v + i, vv);
        float64x2_t num = vmulq_f64(vlr, vdivq_f64(vm, vbc1));
        float64x2_t den = vaddq_f64(vsqrtq_f64(vdivq_f64(vv, vbc2)), veps);
        vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), vdivq_f64(num, den)));
    }
    for (; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

}  // namespace

const KernelTable* neon_table() {
    static const KernelTable t = {
        axpy_v, vadd_v, vsub_v, vmul_v, vscale_v, leaky_relu_v,
        dot_v,  vsum_v, vmax_v,
        matmul_nn_v, matmul_nt_v, matmul_tn_v,
        adam_step_v,
    };
    return &t;
}

}  // namespace ssw::kern::detail

#else

namespace ssw::kern::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace ssw::kern::detail

#endif  // SSW_HAVE_NEON
