#include "kspp/fields.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>

#include "kspp/kernels.hpp"

namespace kspp {

namespace {

void check_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) throw Error("field contains non-finite values");
}

void check_same_domain(const Domain& a, const Domain& b) {
    if (!a.same_as(b)) throw DomainMismatch("fields live on different domains");
}

}  // namespace

ScalarField::ScalarField(DomainPtr domain, double fill)
    : domain_(std::move(domain)), values_(domain_->size(), fill) {}

ScalarField::ScalarField(DomainPtr domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
    if (values_.size() != domain_->size())
        throw ShapeMismatch("grid values do not match domain resolution");
    check_finite(values_);
}

ScalarField ScalarField::from_function(
    DomainPtr domain, const std::function<double(const std::array<double, kMaxDim>&)>& f) {
    ScalarField out(domain);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(domain->point(i));
    return out;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
    check_same_domain(*domain_, *other.domain_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
    check_same_domain(*domain_, *other.domain_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& x : values_) x *= s;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField f) { return f *= s; }

VectorField::VectorField(DomainPtr domain) {
    const int n = domain->dim();
    components_.reserve(n);
    parities_.reserve(n);
    for (int i = 0; i < n; ++i) {
        components_.emplace_back(domain);
        Parities p = all_cos();
        p[i] = Parity::Sin;
        parities_.push_back(p);
    }
}

VectorField::VectorField(std::vector<ScalarField> components, std::vector<Parities> parities)
    : components_(std::move(components)), parities_(std::move(parities)) {
    if (components_.empty() || components_.size() != parities_.size())
        throw ShapeMismatch("vector field wants one parity tag per component");
    for (const auto& c : components_) check_same_domain(*components_.front().domain(), *c.domain());
}

VectorField& VectorField::operator-=(const VectorField& other) {
    for (int i = 0; i < ncomp(); ++i) components_[i] -= other.components_[i];
    return *this;
}

VectorField& VectorField::operator*=(double s) {
    for (auto& c : components_) c *= s;
    return *this;
}

SpectralField to_spectral(const ScalarField& f) {
    SpectralField out(f.domain());
    f.domain()->analyze(f.values().data(), out.coeffs().data(), out.parities());
    return out;
}

ScalarField from_spectral(const SpectralField& f) {
    std::vector<double> grid(f.domain()->size());
    f.domain()->synthesize(f.coeffs().data(), grid.data(), f.parities());
    return ScalarField(f.domain(), std::move(grid));
}

double lp_norm(const ScalarField& f, double p) {
    if (std::isinf(p)) return kernels::max_abs(f.values().data(), f.size());
    if (p < 1.0) throw InvalidExponent("lp_norm wants p >= 1 or p = inf");
    const double s = kernels::pow_sum(f.values().data(), f.size(), p);
    return std::pow(f.domain()->cell_weight() * s, 1.0 / p);
}

double lp_norm(const VectorField& w, double p) {
    std::vector<const double*> comps(w.ncomp());
    for (int i = 0; i < w.ncomp(); ++i) comps[i] = w.component(i).values().data();
    const std::size_t n = w.component(0).size();
    if (std::isinf(p)) return kernels::vec_max_abs(comps.data(), w.ncomp(), n);
    if (p < 1.0) throw InvalidExponent("lp_norm wants p >= 1 or p = inf");
    const double s = kernels::vec_pow_sum(comps.data(), w.ncomp(), n, p);
    return std::pow(w.domain()->cell_weight() * s, 1.0 / p);
}

double mean(const ScalarField& f) {
    // midpoint-rule average; identical to the zeroth cosine coefficient
    double acc = 0.0;
    for (double x : f.values()) acc += x;
    return acc / static_cast<double>(f.size());
}

ScalarField project_mean_zero(const ScalarField& f) {
    ScalarField out = f;
    const double m = mean(f);
    for (double& x : out.values()) x -= m;
    return out;
}

VectorField gradient(const ScalarField& f) {
    const SpectralField f_hat = to_spectral(f);
    VectorField out(f.domain());
    for (int a = 0; a < f.domain()->dim(); ++a) {
        const SpectralField da = derivative(f_hat, a);
        out.component(a) = from_spectral(da);
    }
    return out;
}

ScalarField divergence(const VectorField& w) {
    const DomainPtr& d = w.domain();
    SpectralField acc(d, all_cos());
    for (int a = 0; a < d->dim(); ++a) {
        if (w.parity(a)[a] != Parity::Sin)
            throw ParityMismatch("divergence wants sine parity on each component's own axis");
        SpectralField comp_hat(d, w.parity(a));
        d->analyze(w.component(a).values().data(), comp_hat.coeffs().data(), comp_hat.parities());
        const SpectralField da = derivative(comp_hat, a);
        for (std::size_t i = 0; i < acc.coeffs().size(); ++i) acc.coeffs()[i] += da.coeffs()[i];
    }
    return from_spectral(acc);
}

SpectralField chemotaxis_flux_hat(const SpectralField& u_hat, const SpectralField& v_hat) {
    const DomainPtr& d = u_hat.domain();
    check_same_domain(*d, *v_hat.domain());

    SpectralField u_t = u_hat;
    truncate_dealias(u_t);
    SpectralField v_t = v_hat;
    truncate_dealias(v_t);

    std::vector<double> u_grid(d->size());
    d->synthesize(u_t.coeffs().data(), u_grid.data(), u_t.parities());

    SpectralField flux(d, all_cos());
    std::vector<double> dv_grid(d->size()), prod(d->size());
    for (int a = 0; a < d->dim(); ++a) {
        const SpectralField dv = derivative(v_t, a);
        d->synthesize(dv.coeffs().data(), dv_grid.data(), dv.parities());
        kernels::multiply(u_grid.data(), dv_grid.data(), prod.data(), d->size());

        SpectralField m(d, dv.parities());
        d->analyze(prod.data(), m.coeffs().data(), m.parities());
        truncate_dealias(m);
        const SpectralField dm = derivative(m, a);
        for (std::size_t i = 0; i < flux.coeffs().size(); ++i)
            flux.coeffs()[i] += dm.coeffs()[i];
    }
    return flux;
}

ScalarField chemotaxis_flux(const ScalarField& u, const ScalarField& v) {
    check_same_domain(*u.domain(), *v.domain());
    return from_spectral(chemotaxis_flux_hat(to_spectral(u), to_spectral(v)));
}

namespace {
constexpr char kFieldMagic[8] = {'K', 'S', 'P', 'P', 'F', 'L', 'D', '1'};
}

void save_binary(const ScalarField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    os.write(kFieldMagic, sizeof(kFieldMagic));
    const std::int32_t dim = f.domain()->dim();
    os.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    for (int a = 0; a < dim; ++a) {
        const std::int32_t n = f.domain()->resolution()[a];
        os.write(reinterpret_cast<const char*>(&n), sizeof(n));
    }
    for (int a = 0; a < dim; ++a) {
        const double L = f.domain()->lengths()[a];
        os.write(reinterpret_cast<const char*>(&L), sizeof(L));
    }
    os.write(reinterpret_cast<const char*>(f.values().data()),
             static_cast<std::streamsize>(f.size() * sizeof(double)));
    if (!os) throw Error("short write to " + path);
}

ScalarField load_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kFieldMagic, sizeof(magic)) != 0)
        throw Error(path + " is not a kspp field file");
    std::int32_t dim = 0;
    is.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    if (!is || dim < 1 || dim > kMaxDim) throw Error(path + ": bad dimension");
    std::vector<int> res(dim);
    std::vector<double> len(dim);
    for (int a = 0; a < dim; ++a) {
        std::int32_t n = 0;
        is.read(reinterpret_cast<char*>(&n), sizeof(n));
        res[a] = n;
    }
    for (int a = 0; a < dim; ++a) is.read(reinterpret_cast<char*>(&len[a]), sizeof(double));
    auto domain = Domain::create(len, res);
    std::vector<double> values(domain->size());
    is.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!is) throw Error(path + ": truncated field data");
    return ScalarField(domain, std::move(values));
}

void write_csv(const ScalarField& f, std::ostream& os) {
    const int dim = f.domain()->dim();
    const char* names[] = {"x", "y", "z"};
    for (int a = 0; a < dim; ++a) os << names[a] << ",";
    os << "value\n";
    os.precision(17);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto x = f.domain()->point(i);
        for (int a = 0; a < dim; ++a) os << x[a] << ",";
        os << f[i] << "\n";
    }
}

}  // namespace kspp
