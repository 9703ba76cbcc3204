#include "sweepsim/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

// AVX2 variants. Lane layout is fixed (one 4-wide accumulator, left-to-right
// tail), so results are deterministic run to run on the same machine. The
// max-type kernels commute and match the scalar reference bitwise; sum/dot
// differ from scalar by accumulation order only.

namespace sweepsim::kernels {

namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double max_abs_avx2(const double* x, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
    double m = hmax(acc);
    for (; i < n; ++i) m = std::max(m, std::fabs(x[i]));
    return m;
}

double sup_gap_avx2(const double* a, const double* b, std::size_t n_states, std::size_t dim) {
    double m = 0.0;
    if (dim == 1) {
        __m256d acc = _mm256_setzero_pd();
        std::size_t i = 0;
        for (; i + 4 <= n_states; i += 4) {
            const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
            acc = _mm256_max_pd(acc, _mm256_mul_pd(d, d));
        }
        m = hmax(acc);
        for (; i < n_states; ++i) {
            const double d = a[i] - b[i];
            m = std::max(m, d * d);
        }
    } else {
        // General-dim records are short; per-record scalar accumulation keeps
        // the result identical to the reference.
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

const Ops kAvx2{sum_avx2, dot_avx2, max_abs_avx2, sup_gap_avx2, "avx2"};

}  // namespace

const Ops& avx2_ops() { return kAvx2; }

}  // namespace sweepsim::kernels
