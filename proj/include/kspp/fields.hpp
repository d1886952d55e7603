#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "kspp/domain.hpp"

namespace kspp {

/// Grid values of a scalar quantity (cell density u, chemoattractant
/// concentration v, forcing g/h) on a Domain. Values are plain physical
/// samples at the collocation nodes; the spectral interpretation of a
/// scalar is always the cosine (Neumann) basis.
class ScalarField {
  public:
    explicit ScalarField(DomainPtr domain, double fill = 0.0);
    ScalarField(DomainPtr domain, std::vector<double> values);

    static ScalarField from_function(
        DomainPtr domain, const std::function<double(const std::array<double, kMaxDim>&)>& f);

    const DomainPtr& domain() const { return domain_; }
    std::size_t size() const { return values_.size(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    ScalarField& operator+=(const ScalarField& other);
    ScalarField& operator-=(const ScalarField& other);
    ScalarField& operator*=(double s);

  private:
    DomainPtr domain_;
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField f);

/// n grid components with per-axis parity tags describing each component's
/// spectral basis (a gradient's component i is Sin on axis i, Cos elsewhere).
class VectorField {
  public:
    explicit VectorField(DomainPtr domain);
    VectorField(std::vector<ScalarField> components, std::vector<Parities> parities);

    const DomainPtr& domain() const { return components_.front().domain(); }
    int ncomp() const { return static_cast<int>(components_.size()); }
    ScalarField& component(int i) { return components_[i]; }
    const ScalarField& component(int i) const { return components_[i]; }
    const Parities& parity(int i) const { return parities_[i]; }

    VectorField& operator-=(const VectorField& other);
    VectorField& operator*=(double s);

  private:
    std::vector<ScalarField> components_;
    std::vector<Parities> parities_;
};

// --- transforms -------------------------------------------------------------

SpectralField to_spectral(const ScalarField& f);
ScalarField from_spectral(const SpectralField& f);

// --- measurement ------------------------------------------------------------

/// Weighted-quadrature L^p norm; p = inf gives the grid max. For vector
/// fields the pointwise Euclidean magnitude enters the integral.
/// Throws InvalidExponent for p < 1.
double lp_norm(const ScalarField& f, double p);
double lp_norm(const VectorField& w, double p);

double mean(const ScalarField& f);
ScalarField project_mean_zero(const ScalarField& f);

// --- calculus ---------------------------------------------------------------

VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& w);

/// div(u grad v), evaluated pseudo-spectrally with 2/3-rule dealiasing on
/// the product u * dv/dx_i. The result has exactly zero mean: a sine-parity
/// factor never feeds coefficient zero after differentiation.
ScalarField chemotaxis_flux(const ScalarField& u, const ScalarField& v);

/// Spectral core of chemotaxis_flux (cosine-parity coefficients in/out).
SpectralField chemotaxis_flux_hat(const SpectralField& u_hat, const SpectralField& v_hat);

// --- serialization ----------------------------------------------------------

/// Flat binary layout: magic "KSPPFLD1", int32 dim, int32 N per axis,
/// float64 L per axis, then row-major float64 grid values.
void save_binary(const ScalarField& f, const std::string& path);
ScalarField load_binary(const std::string& path);

/// CSV with one node per row: coordinates then value.
void write_csv(const ScalarField& f, std::ostream& os);

}  // namespace kspp
