#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops used by the quadrature and trajectory-analysis
// code paths: plain reductions over packed double buffers. Each kernel has a
// scalar reference implementation and (on x86-64 builds) an AVX2 variant;
// the active table is picked once at startup from CPU features and can be
// forced with SWEEPSIM_KERNELS=scalar|avx2.
//
// max-type kernels are order-independent and must agree bitwise across
// variants; sum/dot accumulate in a different order under SIMD and agree to
// rounding only. The equivalence tests pin both contracts.

namespace sweepsim::kernels {

struct Ops {
    double (*sum)(const double* x, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*max_abs)(const double* x, std::size_t n);
    // Max Euclidean distance between corresponding states of two packed
    // trajectories: n_states records of `dim` doubles each.
    double (*sup_gap)(const double* a, const double* b, std::size_t n_states, std::size_t dim);
    const char* name;
};

const Ops& scalar_ops();
bool avx2_available();                 // compiled in AND supported by this CPU
const Ops* avx2_ops_if_supported();    // null when unavailable
const Ops& active();                   // selected at first use
std::string active_name();

#if defined(SWEEPSIM_KERNELS_AVX2)
const Ops& avx2_ops();
#endif

}  // namespace sweepsim::kernels
