#include "kspp/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kspp/kernels.hpp"

namespace kspp {

namespace {
constexpr double kPi = std::numbers::pi;
}

DomainPtr Domain::create(std::vector<double> lengths, std::vector<int> resolution) {
    if (lengths.empty() || lengths.size() > kMaxDim || lengths.size() != resolution.size())
        throw ShapeMismatch("domain wants 1-3 axes with matching lengths/resolution");
    for (double L : lengths)
        if (!(L > 0.0)) throw NonPositiveLength("axis length must be positive");
    for (int N : resolution) {
        if (N < 8) throw ResolutionTooSmall("per-axis resolution must be >= 8");
        if (N % 2 != 0) throw ResolutionTooSmall("per-axis resolution must be even");
    }

    auto d = std::shared_ptr<Domain>(new Domain());
    d->dim_ = static_cast<int>(lengths.size());
    d->lengths_ = std::move(lengths);
    d->resolution_ = std::move(resolution);

    d->size_ = 1;
    d->volume_ = 1.0;
    for (int a = 0; a < d->dim_; ++a) {
        d->size_ *= static_cast<std::size_t>(d->resolution_[a]);
        d->volume_ *= d->lengths_[a];
    }
    d->cell_weight_ = d->volume_ / static_cast<double>(d->size_);

    d->lambda1_ = 0.0;
    for (int a = 0; a < d->dim_; ++a) {
        const double rate = (kPi / d->lengths_[a]) * (kPi / d->lengths_[a]);
        if (a == 0 || rate < d->lambda1_) d->lambda1_ = rate;
        d->dealias_cutoff_[a] = (2 * d->resolution_[a] - 1) / 3;
    }

    d->axis_.resize(d->dim_);
    for (int a = 0; a < d->dim_; ++a) {
        const int N = d->resolution_[a];
        const double L = d->lengths_[a];
        AxisOps& ops = d->axis_[a];
        ops.cos_analyze.assign(static_cast<std::size_t>(N) * N, 0.0);
        ops.cos_synthesize.assign(static_cast<std::size_t>(N) * N, 0.0);
        ops.sin_analyze.assign(static_cast<std::size_t>(N) * N, 0.0);
        ops.sin_synthesize.assign(static_cast<std::size_t>(N) * N, 0.0);
        ops.nodes.resize(N);
        ops.wavenumbers.resize(N);
        for (int j = 0; j < N; ++j) ops.nodes[j] = (j + 0.5) * L / N;
        for (int k = 0; k < N; ++k) ops.wavenumbers[k] = k * kPi / L;
        for (int k = 0; k < N; ++k) {
            const double scale = (k == 0) ? 1.0 / N : 2.0 / N;
            for (int j = 0; j < N; ++j) {
                const double arg = k * kPi * (j + 0.5) / N;
                ops.cos_analyze[static_cast<std::size_t>(k) * N + j] = scale * std::cos(arg);
                ops.cos_synthesize[static_cast<std::size_t>(j) * N + k] = std::cos(arg);
                // sine basis uses the same index slot; slot 0 is identically zero
                ops.sin_analyze[static_cast<std::size_t>(k) * N + j] =
                    (k == 0) ? 0.0 : (2.0 / N) * std::sin(arg);
                ops.sin_synthesize[static_cast<std::size_t>(j) * N + k] =
                    (k == 0) ? 0.0 : std::sin(arg);
            }
        }
    }

    d->eigenvalues_.resize(d->size_);
    d->mode_weights_.resize(d->size_);
    for (std::size_t flat = 0; flat < d->size_; ++flat) {
        const auto k = d->multi_index(flat);
        double lam = 0.0, w = 1.0;
        for (int a = 0; a < d->dim_; ++a) {
            const double wn = k[a] * kPi / d->lengths_[a];
            lam += wn * wn;
            w *= (k[a] == 0) ? d->lengths_[a] : 0.5 * d->lengths_[a];
        }
        d->eigenvalues_[flat] = lam;
        d->mode_weights_[flat] = w;
    }

    return d;
}

double Domain::node(int axis, int j) const { return axis_[axis].nodes[j]; }

std::array<double, kMaxDim> Domain::point(std::size_t flat) const {
    std::array<double, kMaxDim> x{};
    for (int a = dim_ - 1; a >= 0; --a) {
        const int N = resolution_[a];
        x[a] = axis_[a].nodes[flat % N];
        flat /= N;
    }
    return x;
}

std::array<int, kMaxDim> Domain::multi_index(std::size_t flat) const {
    std::array<int, kMaxDim> k{};
    for (int a = dim_ - 1; a >= 0; --a) {
        const int N = resolution_[a];
        k[a] = static_cast<int>(flat % N);
        flat /= N;
    }
    return k;
}

std::size_t Domain::flat_index(const std::array<int, kMaxDim>& k) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim_; ++a) flat = flat * resolution_[a] + k[a];
    return flat;
}

void Domain::apply_axis(const double* in, double* out, int axis, const double* M) const {
    std::size_t outer = 1, inner = 1;
    for (int a = 0; a < axis; ++a) outer *= resolution_[a];
    for (int a = axis + 1; a < dim_; ++a) inner *= resolution_[a];
    kernels::axis_apply(M, resolution_[axis], in, out, outer, inner);
}

void Domain::transform(const double* in, double* out, const Parities& parity,
                       bool forward) const {
    // ping-pong through scratch so no pass reads and writes the same array;
    // `out` may alias `in`
    std::vector<double> buf1(size_), buf2(dim_ > 1 ? size_ : 0);
    double* scratch[2] = {buf1.data(), buf2.data()};
    const double* src = in;
    for (int a = 0; a < dim_; ++a) {
        const AxisOps& ops = axis_[a];
        const double* M = forward
                              ? (parity[a] == Parity::Cos ? ops.cos_analyze.data()
                                                          : ops.sin_analyze.data())
                              : (parity[a] == Parity::Cos ? ops.cos_synthesize.data()
                                                          : ops.sin_synthesize.data());
        double* dst = scratch[a % 2];
        apply_axis(src, dst, a, M);
        src = dst;
    }
    std::copy(src, src + size_, out);
}

void Domain::analyze(const double* grid, double* coeffs, const Parities& parity) const {
    transform(grid, coeffs, parity, true);
}

void Domain::synthesize(const double* coeffs, double* grid, const Parities& parity) const {
    transform(coeffs, grid, parity, false);
}

double Domain::evaluate_series(const double* coeffs, const Parities& parity,
                               const std::array<double, kMaxDim>& x) const {
    double total = 0.0;
    for (std::size_t flat = 0; flat < size_; ++flat) {
        if (coeffs[flat] == 0.0) continue;
        const auto k = multi_index(flat);
        double basis = 1.0;
        for (int a = 0; a < dim_; ++a) {
            const double arg = axis_[a].wavenumbers[k[a]] * x[a];
            basis *= (parity[a] == Parity::Cos) ? std::cos(arg) : std::sin(arg);
        }
        total += coeffs[flat] * basis;
    }
    return total;
}

bool Domain::same_as(const Domain& other) const {
    return this == &other ||
           (dim_ == other.dim_ && lengths_ == other.lengths_ && resolution_ == other.resolution_);
}

SpectralField::SpectralField(DomainPtr domain, Parities parity)
    : domain_(std::move(domain)), parity_(parity), coeffs_(domain_->size(), 0.0) {}

SpectralField::SpectralField(DomainPtr domain, std::vector<double> coeffs, Parities parity)
    : domain_(std::move(domain)), parity_(parity), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != domain_->size())
        throw ShapeMismatch("coefficient array does not match domain size");
}

double SpectralField::evaluate(const std::array<double, kMaxDim>& x) const {
    return domain_->evaluate_series(coeffs_.data(), parity_, x);
}

SpectralField derivative(const SpectralField& f, int axis) {
    const Domain& d = *f.domain();
    Parities out_parity = f.parities();
    const bool from_cos = (f.parity(axis) == Parity::Cos);
    out_parity[axis] = from_cos ? Parity::Sin : Parity::Cos;

    SpectralField out(f.domain(), out_parity);
    const int N = d.resolution()[axis];
    std::size_t inner = 1;
    for (int a = axis + 1; a < d.dim(); ++a) inner *= d.resolution()[a];
    const std::size_t outer = d.size() / (static_cast<std::size_t>(N) * inner);
    const double sign = from_cos ? -1.0 : 1.0;
    const double base = std::numbers::pi / d.lengths()[axis];

    for (std::size_t o = 0; o < outer; ++o)
        for (int m = 0; m < N; ++m) {
            const double factor = sign * base * m;
            const std::size_t off = (o * N + m) * inner;
            for (std::size_t i = 0; i < inner; ++i)
                out.coeffs()[off + i] = factor * f.coeffs()[off + i];
        }
    return out;
}

SpectralField spectral_laplacian(const SpectralField& f) {
    SpectralField out(f.domain(), f.parities());
    const auto& lam = f.domain()->eigenvalues();
    for (std::size_t i = 0; i < lam.size(); ++i) out.coeffs()[i] = -lam[i] * f.coeffs()[i];
    return out;
}

void truncate_dealias(SpectralField& f) {
    const Domain& d = *f.domain();
    for (std::size_t flat = 0; flat < d.size(); ++flat) {
        const auto k = d.multi_index(flat);
        for (int a = 0; a < d.dim(); ++a)
            if (k[a] > d.dealias_cutoff(a)) {
                f.coeffs()[flat] = 0.0;
                break;
            }
    }
}

DomainPtr assemble_domain(std::vector<double> lengths, std::vector<int> resolution) {
    return Domain::create(std::move(lengths), std::move(resolution));
}

double lambda1(const Domain& d) { return d.lambda1(); }

}  // namespace kspp
