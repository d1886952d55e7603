#pragma once

#include <cstddef>

// Hot inner loops, each in a serial reference version and an OpenMP version.
// The serial versions are the ground truth the tests compare against; the
// dispatching entry points pick a version from the runtime thread setting.
// Parallel versions never reduce across threads in a thread-count-dependent
// order, so both versions produce bit-identical results.

namespace kspp::kernels {

// ---------------------------------------------------------------------------
// axis_apply: dense matrix applied along one axis of a flattened tensor.
// The tensor is viewed as [outer][n][inner] (row-major) and
//   out[o, k, i] = sum_j M[k*n + j] * in[o, j, i].
// All transforms (analysis, synthesis, both parities) are instances of this.
// ---------------------------------------------------------------------------
void axis_apply_serial(const double* M, int n, const double* in, double* out,
                       std::size_t outer, std::size_t inner);
void axis_apply_parallel(const double* M, int n, const double* in, double* out,
                         std::size_t outer, std::size_t inner);
void axis_apply(const double* M, int n, const double* in, double* out,
                std::size_t outer, std::size_t inner);

// ---------------------------------------------------------------------------
// duhamel_sweep: exponential trapezoidal recurrence over a time grid,
// independently per mode:
//   a[0][k]   = a0[k]
//   a[j+1][k] = decay[k]*a[j][k] + wa[k]*src[j][k] + wb[k]*src[j+1][k]
// src and out are node-major [nodes][modes]; out has `nodes` rows and
// src must have at least `nodes` rows.
// ---------------------------------------------------------------------------
void duhamel_sweep_serial(const double* decay, const double* wa, const double* wb,
                          const double* src, const double* a0, double* out,
                          std::size_t nodes, std::size_t modes);
void duhamel_sweep_parallel(const double* decay, const double* wa, const double* wb,
                            const double* src, const double* a0, double* out,
                            std::size_t nodes, std::size_t modes);
void duhamel_sweep(const double* decay, const double* wa, const double* wb,
                   const double* src, const double* a0, double* out,
                   std::size_t nodes, std::size_t modes);

// ---------------------------------------------------------------------------
// pow_sum: sum_i |f[i]|^p. Reduction runs over a fixed partition of 64
// chunks combined in index order, so the result does not depend on the
// thread count.
// ---------------------------------------------------------------------------
double pow_sum_serial(const double* f, std::size_t n, double p);
double pow_sum_parallel(const double* f, std::size_t n, double p);
double pow_sum(const double* f, std::size_t n, double p);

// sum_i (sqrt(sum_c comps[c][i]^2))^p for a vector field with ncomp
// components; same chunked reduction scheme.
double vec_pow_sum_serial(const double* const* comps, int ncomp, std::size_t n, double p);
double vec_pow_sum_parallel(const double* const* comps, int ncomp, std::size_t n, double p);
double vec_pow_sum(const double* const* comps, int ncomp, std::size_t n, double p);

double max_abs(const double* f, std::size_t n);
double vec_max_abs(const double* const* comps, int ncomp, std::size_t n);

// out[i] = a[i]*b[i]
void multiply_serial(const double* a, const double* b, double* out, std::size_t n);
void multiply_parallel(const double* a, const double* b, double* out, std::size_t n);
void multiply(const double* a, const double* b, double* out, std::size_t n);

}  // namespace kspp::kernels
