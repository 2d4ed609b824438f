// Runtime dispatch: picks the widest supported backend at startup.
// Tests pin a specific backend via set_backend().

#include "ssw/kernels.hpp"

namespace ssw::kern {

void (*axpy)(double, const double*, double*, std::size_t) = nullptr;
void (*vadd)(const double*, const double*, double*, std::size_t) = nullptr;
void (*vsub)(const double*, const double*, double*, std::size_t) = nullptr;
void (*vmul)(const double*, const double*, double*, std::size_t) = nullptr;
void (*vscale)(const double*, double, double*, std::size_t) = nullptr;
void (*leaky_relu)(const double*, double, double*, std::size_t) = nullptr;
double (*dot)(const double*, const double*, std::size_t) = nullptr;
double (*vsum)(const double*, std::size_t) = nullptr;
double (*vmax)(const double*, std::size_t) = nullptr;
void (*matmul_nn)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t) = nullptr;
void (*matmul_nt)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t) = nullptr;
void (*matmul_tn)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t) = nullptr;
void (*adam_step)(double*, const double*, double*, double*, std::size_t,
                  double, double, double, double, double, double) = nullptr;

namespace {

Backend g_active = Backend::scalar;

bool cpu_supports(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(__x86_64__) || defined(__i386__)
            return detail::avx2_table() != nullptr && __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Backend::neon:
            // compiled in only on aarch64, where it is baseline
            return detail::neon_table() != nullptr;
    }
    return false;
}

const detail::KernelTable* table_for(Backend b) {
    switch (b) {
        case Backend::scalar: return &detail::scalar_table();
        case Backend::avx2: return detail::avx2_table();
        case Backend::neon: return detail::neon_table();
    }
    return nullptr;
}

void install(const detail::KernelTable& t) {
    axpy = t.axpy;
    vadd = t.vadd;
    vsub = t.vsub;
    vmul = t.vmul;
    vscale = t.vscale;
    leaky_relu = t.leaky_relu;
    dot = t.dot;
    vsum = t.vsum;
    vmax = t.vmax;
    matmul_nn = t.matmul_nn;
    matmul_nt = t.matmul_nt;
    matmul_tn = t.matmul_tn;
    adam_step = t.adam_step;
}

struct AutoSelect {
    AutoSelect() {
        Backend best = Backend::scalar;
        if (cpu_supports(Backend::neon)) best = Backend::neon;
        if (cpu_supports(Backend::avx2)) best = Backend::avx2;
        install(*table_for(best));
        g_active = best;
    }
};
const AutoSelect g_auto;

}  // namespace

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "?";
}

std::vector<Backend> available_backends() {
    std::vector<Backend> out{Backend::scalar};
    if (cpu_supports(Backend::avx2)) out.push_back(Backend::avx2);
    if (cpu_supports(Backend::neon)) out.push_back(Backend::neon);
    return out;
}

Backend active_backend() { return g_active; }

bool set_backend(Backend b) {
    if (!cpu_supports(b)) return false;
    const detail::KernelTable* t = table_for(b);
    if (!t) return false;
    install(*t);
    g_active = b;
    return true;
}

}  // namespace ssw::kern
