#include "sweepsim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace sweepsim::kernels {

namespace {

double sum_scalar(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double max_abs_scalar(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
    return m;
}

double sup_gap_scalar(const double* a, const double* b, std::size_t n_states, std::size_t dim) {
    double m = 0.0;
    if (dim == 1) {
        for (std::size_t i = 0; i < n_states; ++i) {
            const double d = a[i] - b[i];
            m = std::max(m, d * d);
        }
    } else {
        for (std::size_t i = 0; i < n_states; ++i) {
            double s = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double g = a[i * dim + d] - b[i * dim + d];
                s += g * g;
            }
            m = std::max(m, s);
        }
    }
    return std::sqrt(m);
}

const Ops kScalar{sum_scalar, dot_scalar, max_abs_scalar, sup_gap_scalar, "scalar"};

const Ops& select() {
    if (const char* env = std::getenv("SWEEPSIM_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return kScalar;
#if defined(SWEEPSIM_KERNELS_AVX2)
        if (want == "avx2") {
            if (!avx2_available())
                throw std::runtime_error("SWEEPSIM_KERNELS=avx2 but CPU lacks AVX2");
            return avx2_ops();
        }
#endif
        if (!want.empty() && want != "auto")
            throw std::runtime_error("SWEEPSIM_KERNELS: unknown value '" + want + "'");
    }
#if defined(SWEEPSIM_KERNELS_AVX2)
    if (avx2_available()) return avx2_ops();
#endif
    return kScalar;
}

}  // namespace

const Ops& scalar_ops() { return kScalar; }

bool avx2_available() {
#if defined(SWEEPSIM_KERNELS_AVX2)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const Ops* avx2_ops_if_supported() {
#if defined(SWEEPSIM_KERNELS_AVX2)
    if (avx2_available()) return &avx2_ops();
#endif
    return nullptr;
}

const Ops& active() {
    static const Ops& ops = select();
    return ops;
}

std::string active_name() { return active().name; }

}  // namespace sweepsim::kernels
