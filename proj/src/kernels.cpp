#include "kspp/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kspp/threading.hpp"

namespace kspp::kernels {

namespace {

constexpr std::size_t kReductionChunks = 64;

inline double pow_abs(double x, double p) {
    double a = std::fabs(x);
    if (p == 2.0) return a * a;
    if (p == 4.0) {
        double a2 = a * a;
        return a2 * a2;
    }
    if (p == 1.0) return a;
    return std::pow(a, p);
}

inline void axis_apply_line(const double* M, int n, const double* in, double* out,
                            std::size_t inner) {
    // in, out point at one [n][inner] block
    for (int k = 0; k < n; ++k) {
        double* o = out + static_cast<std::size_t>(k) * inner;
        const double* row = M + static_cast<std::size_t>(k) * n;
        if (inner == 1) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += row[j] * in[j];
            o[0] = acc;
        } else {
            std::fill(o, o + inner, 0.0);
            for (int j = 0; j < n; ++j) {
                const double m = row[j];
                const double* src = in + static_cast<std::size_t>(j) * inner;
                for (std::size_t i = 0; i < inner; ++i) o[i] += m * src[i];
            }
        }
    }
}

inline void sweep_range(const double* decay, const double* wa, const double* wb,
                        const double* src, const double* a0, double* out,
                        std::size_t nodes, std::size_t modes,
                        std::size_t k_begin, std::size_t k_end) {
    for (std::size_t k = k_begin; k < k_end; ++k) out[k] = a0[k];
    for (std::size_t j = 0; j + 1 < nodes; ++j) {
        const double* aj = out + j * modes;
        double* an = out + (j + 1) * modes;
        const double* sj = src + j * modes;
        const double* sn = src + (j + 1) * modes;
        for (std::size_t k = k_begin; k < k_end; ++k)
            an[k] = decay[k] * aj[k] + wa[k] * sj[k] + wb[k] * sn[k];
    }
}

}  // namespace

void axis_apply_serial(const double* M, int n, const double* in, double* out,
                       std::size_t outer, std::size_t inner) {
    const std::size_t block = static_cast<std::size_t>(n) * inner;
    for (std::size_t o = 0; o < outer; ++o)
        axis_apply_line(M, n, in + o * block, out + o * block, inner);
}

void axis_apply_parallel(const double* M, int n, const double* in, double* out,
                         std::size_t outer, std::size_t inner) {
    const std::size_t block = static_cast<std::size_t>(n) * inner;
#pragma omp parallel for schedule(static) num_threads(kspp::threading::threads())
    for (long long o = 0; o < static_cast<long long>(outer); ++o)
        axis_apply_line(M, n, in + static_cast<std::size_t>(o) * block,
                        out + static_cast<std::size_t>(o) * block, inner);
}

void axis_apply(const double* M, int n, const double* in, double* out,
                std::size_t outer, std::size_t inner) {
    if (threading::parallel_enabled() && outer > 1)
        axis_apply_parallel(M, n, in, out, outer, inner);
    else
        axis_apply_serial(M, n, in, out, outer, inner);
}

void duhamel_sweep_serial(const double* decay, const double* wa, const double* wb,
                          const double* src, const double* a0, double* out,
                          std::size_t nodes, std::size_t modes) {
    sweep_range(decay, wa, wb, src, a0, out, nodes, modes, 0, modes);
}

void duhamel_sweep_parallel(const double* decay, const double* wa, const double* wb,
                            const double* src, const double* a0, double* out,
                            std::size_t nodes, std::size_t modes) {
    // Each thread sweeps its own contiguous mode range over all nodes; no
    // synchronization between steps is needed.
    const int nt = kspp::threading::threads();
#pragma omp parallel num_threads(nt)
    {
#ifdef _OPENMP
        const int tid = omp_get_thread_num();
        const int nth = omp_get_num_threads();
#else
        const int tid = 0;
        const int nth = 1;
#endif
        const std::size_t lo = modes * tid / nth;
        const std::size_t hi = modes * (tid + 1) / nth;
        sweep_range(decay, wa, wb, src, a0, out, nodes, modes, lo, hi);
    }
}

void duhamel_sweep(const double* decay, const double* wa, const double* wb,
                   const double* src, const double* a0, double* out,
                   std::size_t nodes, std::size_t modes) {
    if (threading::parallel_enabled() && modes >= 64)
        duhamel_sweep_parallel(decay, wa, wb, src, a0, out, nodes, modes);
    else
        duhamel_sweep_serial(decay, wa, wb, src, a0, out, nodes, modes);
}

double pow_sum_serial(const double* f, std::size_t n, double p) {
    double partial[kReductionChunks] = {};
    for (std::size_t c = 0; c < kReductionChunks; ++c) {
        const std::size_t lo = n * c / kReductionChunks;
        const std::size_t hi = n * (c + 1) / kReductionChunks;
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += pow_abs(f[i], p);
        partial[c] = acc;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < kReductionChunks; ++c) total += partial[c];
    return total;
}

double pow_sum_parallel(const double* f, std::size_t n, double p) {
    double partial[kReductionChunks] = {};
#pragma omp parallel for schedule(static) num_threads(kspp::threading::threads())
    for (long long c = 0; c < static_cast<long long>(kReductionChunks); ++c) {
        const std::size_t lo = n * c / kReductionChunks;
        const std::size_t hi = n * (c + 1) / kReductionChunks;
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += pow_abs(f[i], p);
        partial[c] = acc;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < kReductionChunks; ++c) total += partial[c];
    return total;
}

double pow_sum(const double* f, std::size_t n, double p) {
    if (threading::parallel_enabled() && n >= 4096) return pow_sum_parallel(f, n, p);
    return pow_sum_serial(f, n, p);
}

namespace {
inline double vec_mag(const double* const* comps, int ncomp, std::size_t i) {
    double s = 0.0;
    for (int c = 0; c < ncomp; ++c) s += comps[c][i] * comps[c][i];
    return std::sqrt(s);
}
}  // namespace

double vec_pow_sum_serial(const double* const* comps, int ncomp, std::size_t n, double p) {
    double partial[kReductionChunks] = {};
    for (std::size_t c = 0; c < kReductionChunks; ++c) {
        const std::size_t lo = n * c / kReductionChunks;
        const std::size_t hi = n * (c + 1) / kReductionChunks;
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += pow_abs(vec_mag(comps, ncomp, i), p);
        partial[c] = acc;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < kReductionChunks; ++c) total += partial[c];
    return total;
}

double vec_pow_sum_parallel(const double* const* comps, int ncomp, std::size_t n, double p) {
    double partial[kReductionChunks] = {};
#pragma omp parallel for schedule(static) num_threads(kspp::threading::threads())
    for (long long c = 0; c < static_cast<long long>(kReductionChunks); ++c) {
        const std::size_t lo = n * c / kReductionChunks;
        const std::size_t hi = n * (c + 1) / kReductionChunks;
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += pow_abs(vec_mag(comps, ncomp, i), p);
        partial[c] = acc;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < kReductionChunks; ++c) total += partial[c];
    return total;
}

double vec_pow_sum(const double* const* comps, int ncomp, std::size_t n, double p) {
    if (threading::parallel_enabled() && n >= 4096)
        return vec_pow_sum_parallel(comps, ncomp, n, p);
    return vec_pow_sum_serial(comps, ncomp, n, p);
}

double max_abs(const double* f, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(f[i]));
    return m;
}

double vec_max_abs(const double* const* comps, int ncomp, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, vec_mag(comps, ncomp, i));
    return m;
}

void multiply_serial(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void multiply_parallel(const double* a, const double* b, double* out, std::size_t n) {
#pragma omp parallel for schedule(static) num_threads(kspp::threading::threads())
    for (long long i = 0; i < static_cast<long long>(n); ++i) out[i] = a[i] * b[i];
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
    if (threading::parallel_enabled() && n >= 65536)
        multiply_parallel(a, b, out, n);
    else
        multiply_serial(a, b, out, n);
}

}  // namespace kspp::kernels
