#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "kspp/forcing.hpp"
#include "kspp/semigroup.hpp"

namespace kspp {

/// Euler Gamma on (0, 1/2], the argument range 1/2 - n/(2p) lands in for
/// p > n. Throws OutOfRange outside it.
double gamma_function(double x);

struct SolverConfig {
    double p = 4.0;          // integrability exponent, > max{3, n}
    double t_end = 40.0;     // horizon; default 40/lambda1 at lambda1 = 1
    double dt = 0.01;        // uniform step of the exponential trapezoid rule
    double tolerance = 1e-10;
    int max_iterations = 50;

    enum class Mode { Strict, Warn };
    Mode smallness = Mode::Strict;

    enum class Guess { Zero, LinearResponse };
    Guess initial_guess = Guess::Zero;

    std::size_t nodes() const;
    std::vector<double> time_grid() const;
};

/// Time-indexed pair (u, v) with the gradient of v cached per node.
struct TrajectoryState {
    std::vector<double> times;
    std::vector<ScalarField> u;
    std::vector<ScalarField> v;
    std::vector<VectorField> grad_v;

    const DomainPtr& domain() const { return u.front().domain(); }
    std::size_t nodes() const { return times.size(); }
};

/// sup over the sampled horizon of ||u||_{p/2} + ||v||_{p/2} + ||grad v||_p.
double x_norm(const TrajectoryState& s, double p);

/// Same three norms per node, as a signal for the AAP machinery.
SampledSignal norm_series(const TrajectoryState& s, double p);

/// Distance series between two trajectories on a shared grid:
/// ||du||_{p/2} + ||dv||_{p/2} + ||grad dv||_p per node.
std::vector<double> distance_series(const TrajectoryState& a, const TrajectoryState& b, double p);

/// Per-node CSV: t, ||u||_{p/2}, ||v||_{p/2}, ||grad v||_p, mean u.
void write_trajectory_csv(const TrajectoryState& s, double p, std::ostream& os);

/// Constants of the linear X-norm bound and the contraction gate, assembled
/// from the measured semigroup constants k1..k4:
///   C   = 1/lambda1 + lambda1^{-1/2+n/(2p)} Gamma(1/2 - n/(2p))
///   C'' = 1/(lambda1+1) + lambda1^{-1/2+n/(2p)} Gamma(1/2 - n/(2p))
///   C1  = k1 + max{k1, k1^2/(lambda1+1)} + k1 k2 C''
///   C2  = k3
///   C3  = k4 C + k1 k4 C/(lambda1+1) + k2 k4 C'' C
///   C4  = k1/lambda1 + max{k1^2/(lambda1(lambda1+1)), k1/(lambda1+1)}
///         + max{k1 k2 C''/lambda1, k2 C''}
struct SolverConstants {
    double lambda1 = 0;
    double p = 0;
    int n = 0;
    double k1 = 0, k2 = 0, k3 = 0, k4 = 0;
    double C = 0;
    double C_shift = 0;  // C''
    double C1 = 0, C2 = 0, C3 = 0, C4 = 0;
    double rho = 0;                // picked by picard_solve
    double contraction_bound = 0;  // 4 C3 rho
    std::string to_json() const;
};

/// Needs one report per estimate kind; throws MissingReport /
/// ExponentRegimeViolation (p must exceed max{3, n}).
SolverConstants compute_constants(const DomainPtr& domain, double p,
                                  const std::vector<EstimateReport>& reports);

/// First integral equation: the heat flow of u0 minus the Duhamel
/// convolution against div(omega grad zeta) plus the one against g. Every
/// Fourier mode is integrated with the exponential trapezoidal rule (exact
/// for sources linear in time between nodes). omega_zeta may be null (zero
/// source pair). In Strict mode u0 and g must be mean-zero.
std::vector<ScalarField> duhamel_u(const ScalarField& u0, const TrajectoryState* omega_zeta,
                                   const SignalSpec& g, const std::vector<double>& t_grid,
                                   SolverConfig::Mode mode = SolverConfig::Mode::Strict);

struct VTrajectory {
    std::vector<ScalarField> v;
    std::vector<VectorField> grad_v;
};

/// Second integral equation: shifted heat flow of v0 plus convolutions
/// against u and h, rates lambda_k + 1; caches grad v per node.
VTrajectory duhamel_v(const ScalarField& v0, const std::vector<ScalarField>& u,
                      const SignalSpec& h, const std::vector<double>& t_grid);

struct GateReport {
    double data_norm = 0;     // ||u0||_{p/2} + ||v0||_{p/2} + ||grad v0||_p
    double forcing_norm = 0;  // sup_t (||g||_{p/2} + ||h||_{p/2})
    double budget = 0;        // max{C1,C2} data + C4 forcing
    double threshold = 0;     // 3/(16 C3): feasibility of the ball inequality
    bool ok = false;
};

struct LinearReport {
    double x_norm = 0;
    double bound_rhs = 0;  // C1 ||(u0,v0)|| + C2 ||grad v0|| + C3 ||(w,z)||^2 + C4 ||(g,h)||
    bool bound_checked = false;
    bool bound_ok = true;
    std::vector<std::string> warnings;
};

/// Linear solution operator S: compose duhamel_u then duhamel_v. When
/// constants are given the X-norm bound is evaluated; violations throw
/// BoundViolated in Strict mode and are logged in Warn mode.
std::pair<TrajectoryState, LinearReport> solve_linear(const ScalarField& u0,
                                                      const ScalarField& v0,
                                                      const TrajectoryState* omega_zeta,
                                                      const ForcingSpec& forcing,
                                                      const SolverConfig& config,
                                                      const SolverConstants* constants = nullptr);

struct PicardDiagnostics {
    bool converged = false;
    int iterations = 0;
    std::vector<double> diff_norms;  // X-norm of successive differences
    std::vector<double> ratios;      // consecutive diff ratios above the noise floor
    double contraction_ratio_max = 0;
    double residual = 0;  // X-distance of one more application of S
    double linear_response_xnorm = 0;
    double x_norm = 0;
    GateReport gate;
    bool ball_ok = false;  // ball invariance at the chosen rho
    SolverConstants constants;
    std::vector<std::string> warnings;
    std::string to_json() const;
};

/// Fixed point of the full-trajectory map (waveform relaxation): iterate
/// (w,z) -> S(w,z) from the zero trajectory (or the linear response) until
/// the X-norm of successive differences drops below tolerance.
///
/// Smallness gate: the ball inequality max{C1,C2}||data|| + C4||(g,h)|| +
/// C3 rho^2 <= rho must admit some rho < 1/(4 C3), equivalently
/// budget < 3/(16 C3). Strict mode throws SmallnessViolated, Warn proceeds.
/// rho itself is chosen as 2 x_norm(linear response) clamped below 1/(8 C3).
std::pair<TrajectoryState, PicardDiagnostics> picard_solve(const ScalarField& u0,
                                                           const ScalarField& v0,
                                                           const ForcingSpec& forcing,
                                                           const SolverConfig& config,
                                                           SolverConstants constants);

}  // namespace kspp
