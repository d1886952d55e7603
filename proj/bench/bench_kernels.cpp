// Timing comparison of the serial reference kernels against the OpenMP
// versions, on shapes matching the solver's real workloads.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "kspp/kernels.hpp"
#include "kspp/threading.hpp"

using namespace kspp;

namespace {

double seconds(const std::chrono::steady_clock::time_point& a,
               const std::chrono::steady_clock::time_point& b) {
    return std::chrono::duration<double>(b - a).count();
}

template <typename F>
double time_best_of(F&& f, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, seconds(t0, t1));
    }
    return best;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n", name,
                serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main() {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    std::printf("threads: %d\n", threading::threads());

    {
        // transform pass: 32x32 grid, batched like a 4001-node sweep
        const int n = 32;
        const std::size_t outer = 4001 * 32, inner = 1;
        std::vector<double> M(n * n), in(outer * n), out(outer * n);
        for (auto& x : M) x = gauss(rng);
        for (auto& x : in) x = gauss(rng);
        const double ts = time_best_of(
            [&] { kernels::axis_apply_serial(M.data(), n, in.data(), out.data(), outer, inner); },
            3);
        const double tp = time_best_of(
            [&] {
                kernels::axis_apply_parallel(M.data(), n, in.data(), out.data(), outer, inner);
            },
            3);
        report("axis_apply (32^2 x 4001)", ts, tp);
    }

    {
        // Duhamel sweep: 4001 nodes x 1024 modes
        const std::size_t nodes = 4001, modes = 1024;
        std::vector<double> decay(modes), wa(modes), wb(modes), a0(modes);
        std::vector<double> src(nodes * modes), out(nodes * modes);
        for (std::size_t k = 0; k < modes; ++k) {
            decay[k] = std::exp(-1e-2 * k);
            wa[k] = 0.005;
            wb[k] = 0.005;
            a0[k] = gauss(rng);
        }
        for (auto& x : src) x = gauss(rng);
        const double ts = time_best_of(
            [&] {
                kernels::duhamel_sweep_serial(decay.data(), wa.data(), wb.data(), src.data(),
                                              a0.data(), out.data(), nodes, modes);
            },
            3);
        const double tp = time_best_of(
            [&] {
                kernels::duhamel_sweep_parallel(decay.data(), wa.data(), wb.data(), src.data(),
                                                a0.data(), out.data(), nodes, modes);
            },
            3);
        report("duhamel_sweep (4001x1024)", ts, tp);
    }

    {
        // norm reduction: 4M values
        std::vector<double> f(1 << 22);
        for (auto& x : f) x = gauss(rng);
        const double ts =
            time_best_of([&] { (void)kernels::pow_sum_serial(f.data(), f.size(), 4.0); }, 5);
        const double tp =
            time_best_of([&] { (void)kernels::pow_sum_parallel(f.data(), f.size(), 4.0); }, 5);
        report("pow_sum p=4 (4M)", ts, tp);
        if (kernels::pow_sum_serial(f.data(), f.size(), 4.0) !=
            kernels::pow_sum_parallel(f.data(), f.size(), 4.0))
            std::printf("  WARNING: serial/parallel reductions disagree\n");
    }

    {
        // pointwise product: 4M values
        std::vector<double> a(1 << 22), b(1 << 22), out(1 << 22);
        for (auto& x : a) x = gauss(rng);
        for (auto& x : b) x = gauss(rng);
        const double ts = time_best_of(
            [&] { kernels::multiply_serial(a.data(), b.data(), out.data(), a.size()); }, 5);
        const double tp = time_best_of(
            [&] { kernels::multiply_parallel(a.data(), b.data(), out.data(), a.size()); }, 5);
        report("multiply (4M)", ts, tp);
    }

    return 0;
}
