#pragma once

#include <string>
#include <vector>

#include "kspp/mild_solver.hpp"

namespace kspp {

struct StabilityReport {
    double sigma = 0.0;         // fitted decay rate of the two-solution distance
    double D = 0.0;             // fitted amplitude over the initial difference
    double fit_residual = 0.0;  // rms residual of the log-linear fit
    double lambda1 = 0.0;
    bool pass = false;        // 0 < sigma < lambda1 and residual below threshold
    bool degenerate = false;  // identical solutions; sigma undefined
    double perturbation_norm = 0.0;
    double fit_window_start = 0.0;
    std::vector<double> times;
    std::vector<double> distances;
    std::vector<std::string> warnings;
    std::string to_json() const;
};

struct StabilityOptions {
    double residual_threshold = 0.1;
    /// fit window start as a multiple of 1/lambda1
    double window_factor = 5.0;
};

/// Solve the system twice (base data and base plus perturbation), measure
/// the per-node three-norm distance and fit log distance against time on
/// [window_factor/lambda1, t_end]. Both data sets must clear the smallness
/// gate; the perturbation should stay within 10% of the contraction radius
/// rho (logged as a warning when it does not).
StabilityReport stability_experiment(const ScalarField& u0, const ScalarField& v0,
                                     const ForcingSpec& forcing, const ScalarField& du0,
                                     const ScalarField& dv0, const SolverConfig& config,
                                     const SolverConstants& constants,
                                     const StabilityOptions& options = {});

struct GronwallResult {
    double sigma = 0.0;
    double beta = 0.0;  // 1/2 + n/(2p)
    double B1 = 0.0;    // 1/(lambda1-sigma) + (lambda1-sigma)^{-1/2+n/(2p)} Gamma(1/2-n/(2p))
    double B2 = 0.0;    // B1 / (lambda1 + 1 - sigma)
    std::vector<double> t;
    std::vector<double> I1;  // single convolution integral against (1+z^-beta)e^{-(l1-s)z}
    std::vector<double> I2;  // the nested double integral
    bool pass = false;       // I1 <= B1 and I2 <= B2 on the whole grid
    std::string to_json() const;
};

/// Evaluate the two closing integrals of the decay argument and compare
/// them against their closed-form bounds. Needs 0 < sigma < lambda1
/// (RateOrderViolation) and p > n (ExponentRegimeViolation).
GronwallResult gronwall_integrals(double lambda1, double sigma, int n, double p,
                                  const std::vector<double>& t_grid);

}  // namespace kspp
