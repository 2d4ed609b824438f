#pragma once

// Dense f64 kernels behind runtime-dispatched function pointers.
// Scalar versions are the reference; AVX2/NEON variants are selected at
// startup when the CPU supports them and are equivalence-tested against
// the scalar versions. Elementwise kernels are bit-identical across
// backends; reductions (dot, sum, matmul) may differ by rounding only.

#include <cstddef>
#include <string>
#include <vector>

namespace ssw::kern {

enum class Backend { scalar, avx2, neon };

std::string backend_name(Backend b);

// Backends usable on this machine (scalar is always first).
std::vector<Backend> available_backends();

Backend active_backend();

// Install kernel pointers for `b`. Returns false (and leaves the active
// backend unchanged) if `b` is not available.
bool set_backend(Backend b);

// y[i] += a * x[i]
extern void (*axpy)(double a, const double* x, double* y, std::size_t n);
// out[i] = x[i] + y[i]
extern void (*vadd)(const double* x, const double* y, double* out, std::size_t n);
// out[i] = x[i] - y[i]
extern void (*vsub)(const double* x, const double* y, double* out, std::size_t n);
// out[i] = x[i] * y[i]
extern void (*vmul)(const double* x, const double* y, double* out, std::size_t n);
// out[i] = s * x[i]
extern void (*vscale)(const double* x, double s, double* out, std::size_t n);
// out[i] = max(x[i], slope * x[i])
extern void (*leaky_relu)(const double* x, double slope, double* out, std::size_t n);

extern double (*dot)(const double* x, const double* y, std::size_t n);
extern double (*vsum)(const double* x, std::size_t n);
extern double (*vmax)(const double* x, std::size_t n);

// C += A * B        A: M x K, B: K x N, C: M x N (row-major)
extern void (*matmul_nn)(const double* a, const double* b, double* c,
                         std::size_t m, std::size_t k, std::size_t n);
// C += A * B^T      A: M x K, B: N x K, C: M x N
extern void (*matmul_nt)(const double* a, const double* b, double* c,
                         std::size_t m, std::size_t k, std::size_t n);
// C += A^T * B      A: K x M, B: K x N, C: M x N
extern void (*matmul_tn)(const double* a, const double* b, double* c,
                         std::size_t m, std::size_t k, std::size_t n);

// Fused Adam step over one flat parameter array.
//   m = b1*m + (1-b1)*g; v = b2*v + (1-b2)*g^2
//   p -= lr * (m/bc1) / (sqrt(v/bc2) + eps)
extern void (*adam_step)(double* p, const double* g, double* m, double* v,
                         std::size_t n, double lr, double b1, double b2,
                         double bc1, double bc2, double eps);

namespace detail {
struct KernelTable {
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*vadd)(const double*, const double*, double*, std::size_t);
    void (*vsub)(const double*, const double*, double*, std::size_t);
    void (*vmul)(const double*, const double*, double*, std::size_t);
    void (*vscale)(const double*, double, double*, std::size_t);
    void (*leaky_relu)(const double*, double, double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*vsum)(const double*, std::size_t);
    double (*vmax)(const double*, std::size_t);
    void (*matmul_nn)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
    void (*matmul_nt)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
    void (*matmul_tn)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
    void (*adam_step)(double*, const double*, double*, double*, std::size_t,
                      double, double, double, double, double, double);
};

const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();
}  // namespace detail

}  // namespace ssw::kern
