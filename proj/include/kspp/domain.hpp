#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "kspp/errors.hpp"

namespace kspp {

/// Per-axis basis parity of a spectral representation. A plain Neumann
/// scalar is Cos on every axis; differentiating along axis i flips that
/// axis to Sin (and back).
enum class Parity : unsigned char { Cos, Sin };

constexpr int kMaxDim = 3;
using Parities = std::array<Parity, kMaxDim>;

constexpr Parities all_cos() { return {Parity::Cos, Parity::Cos, Parity::Cos}; }

class Domain;
using DomainPtr = std::shared_ptr<const Domain>;

/// Axis-aligned rectangle [0,L1] x ... x [0,Ln] with a uniform tensor grid
/// at the midpoint cosine collocation nodes x_j = (j+1/2) L/N and the
/// explicit Neumann eigenstructure of -Laplace:
///   phi_k(x) = prod_i cos(k_i pi x_i / L_i),   lambda_k = sum_i (k_i pi/L_i)^2.
///
/// Immutable after construction; safe to share across threads.
class Domain : public std::enable_shared_from_this<Domain> {
  public:
    /// Throws NonPositiveLength / ResolutionTooSmall. Resolutions must be
    /// >= 8 and even (the 2/3-rule product dealiasing assumes even counts).
    static DomainPtr create(std::vector<double> lengths, std::vector<int> resolution);

    int dim() const { return dim_; }
    const std::vector<double>& lengths() const { return lengths_; }
    const std::vector<int>& resolution() const { return resolution_; }

    /// Total grid points (= total retained modes).
    std::size_t size() const { return size_; }

    double volume() const { return volume_; }
    /// Uniform quadrature weight prod_i (L_i/N_i) of the midpoint rule.
    double cell_weight() const { return cell_weight_; }

    /// Smallest nonzero Neumann eigenvalue of -Laplace.
    double lambda1() const { return lambda1_; }

    /// lambda_k for every multi-index, flattened row-major like the grids.
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }

    /// Quadrature inner-product weight of eigenfunction k (cosine parity):
    /// prod_i (L_i if k_i = 0 else L_i/2), flattened.
    const std::vector<double>& mode_weights() const { return mode_weights_; }

    /// Collocation node along an axis.
    double node(int axis, int j) const;

    /// Grid coordinates of flat index (trailing entries zero above dim()).
    std::array<double, kMaxDim> point(std::size_t flat) const;

    /// 1D domains are only admitted for oracle tests.
    bool oracle_only() const { return dim_ == 1; }

    /// Largest mode index kept by the 2/3-rule dealiasing mask on an axis.
    int dealias_cutoff(int axis) const { return dealias_cutoff_[axis]; }

    // --- raw-array transform machinery (used by fields/semigroup) ---

    /// Analysis: grid values -> coefficients of the (per-axis) parity basis.
    void analyze(const double* grid, double* coeffs, const Parities& parity) const;
    /// Synthesis: coefficients -> grid values.
    void synthesize(const double* coeffs, double* grid, const Parities& parity) const;

    /// Multi-index of flat coefficient index.
    std::array<int, kMaxDim> multi_index(std::size_t flat) const;
    std::size_t flat_index(const std::array<int, kMaxDim>& k) const;

    /// Evaluate a coefficient array as a basis series at an arbitrary point.
    double evaluate_series(const double* coeffs, const Parities& parity,
                           const std::array<double, kMaxDim>& x) const;

    bool same_as(const Domain& other) const;

  private:
    Domain() = default;

    int dim_ = 0;
    std::vector<double> lengths_;
    std::vector<int> resolution_;
    std::size_t size_ = 0;
    double volume_ = 0.0;
    double cell_weight_ = 0.0;
    double lambda1_ = 0.0;
    std::vector<double> eigenvalues_;
    std::vector<double> mode_weights_;
    std::array<int, kMaxDim> dealias_cutoff_{};

    // per-axis dense transform matrices (N x N, row-major)
    struct AxisOps {
        std::vector<double> cos_analyze, cos_synthesize;
        std::vector<double> sin_analyze, sin_synthesize;
        std::vector<double> nodes;
        std::vector<double> wavenumbers;  // k*pi/L
    };
    std::vector<AxisOps> axis_;

    void apply_axis(const double* in, double* out, int axis, const double* M) const;
    void transform(const double* in, double* out, const Parities& parity, bool forward) const;
};

/// Coefficient array over a Domain with per-axis parity tags.
class SpectralField {
  public:
    explicit SpectralField(DomainPtr domain, Parities parity = all_cos());
    SpectralField(DomainPtr domain, std::vector<double> coeffs, Parities parity = all_cos());

    const DomainPtr& domain() const { return domain_; }
    Parity parity(int axis) const { return parity_[axis]; }
    const Parities& parities() const { return parity_; }

    std::vector<double>& coeffs() { return coeffs_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double operator[](std::size_t i) const { return coeffs_[i]; }
    double& operator[](std::size_t i) { return coeffs_[i]; }

    /// Series value at a point (boundary traces in tests).
    double evaluate(const std::array<double, kMaxDim>& x) const;

  private:
    DomainPtr domain_;
    Parities parity_ = all_cos();
    std::vector<double> coeffs_;
};

// Spectral calculus; exact term-by-term operations on coefficients.

/// d/dx_axis; flips the axis parity.
SpectralField derivative(const SpectralField& f, int axis);

/// Coefficient-wise multiplication by -lambda_k (cosine parity only).
SpectralField spectral_laplacian(const SpectralField& f);

/// Zero every coefficient with a multi-index above the 2/3 dealiasing cutoff.
void truncate_dealias(SpectralField& f);

/// assemble_domain per the module contract (alias of Domain::create).
DomainPtr assemble_domain(std::vector<double> lengths, std::vector<int> resolution);

/// Smallest nonzero eigenvalue.
double lambda1(const Domain& d);

}  // namespace kspp
