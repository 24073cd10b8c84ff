#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "angulus/error.hpp"

/// Numerical kernel shared by all modules: quadrature with algebraic endpoint
/// singularities, damped Newton for small nonlinear systems, an embedded
/// Runge-Kutta integrator for complex trajectories, and Richardson-style
/// limit extrapolation. Everything here is pure.
namespace angulus::numerics {

using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Quadrature

/// Integration interval with declared endpoint behaviour f(x) ~ (x-L)^left_exponent
/// near L and f(x) ~ (R-x)^right_exponent near R.
struct QuadratureSpec {
    double lower = 0.0;
    double upper = 1.0;
    double left_exponent = 0.0;
    double right_exponent = 0.0;
    double tolerance = 1e-12; ///< relative to |result|
    int max_panels = 4000;
};

struct QuadratureResult {
    Complex value;
    double error = 0.0; ///< sum of per-panel rule-difference estimates
    int panels = 0;
};

/// Adaptive integration of a complex-valued integrand.
///
/// Error model: every panel carries |I_high - I_low| for a nested rule pair
/// (Gauss-Kronrod 7/15 on regular panels, Gauss-Jacobi n/n+8 on panels that
/// touch an endpoint with a non-zero declared exponent, where the algebraic
/// factor is absorbed into the weight). The panel with the largest estimate is
/// bisected until the sum of estimates is below tolerance * |value|. Endpoint
/// singularities that are not algebraic (e.g. log x) are still handled by the
/// bisection, at a geometric cost.
///
/// Throws ConvergenceError (carrying the last real part) when max_panels is hit.
QuadratureResult integrate(const std::function<Complex(double)>& f, const QuadratureSpec& spec);

/// Gauss-Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1, 1]
/// (Golub-Welsch).
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussRule gauss_jacobi(int n, double alpha, double beta);

// ---------------------------------------------------------------------------
// Nonlinear systems

struct SolveOptions {
    double tolerance = 1e-12; ///< on the infinity norm of the residual
    int max_iterations = 60;
    double fd_step = 1e-7;
    double min_damping = 1e-10;
};

struct SolveResult {
    RealVector root;
    double residual_norm = 0.0;
    int iterations = 0;
};

/// Newton failure: keeps the best iterate seen and its residual norm.
class SolveFailure : public ConvergenceError {
public:
    SolveFailure(const std::string& what, RealVector best, double residual)
        : ConvergenceError(what, best.size() > 0 ? best[0] : 0.0, residual),
          best_(std::move(best)) {}
    const RealVector& best_iterate() const noexcept { return best_; }

private:
    RealVector best_;
};

using Residual = std::function<RealVector(const RealVector&)>;

/// Damped Newton with a central-difference Jacobian and backtracking on the
/// residual norm. A residual that throws DomainError at a trial point is
/// treated as an infeasible step and the damping is increased. An empty
/// unknown vector is accepted; the residual is evaluated once.
SolveResult solve_system(const Residual& residual, RealVector guess, const SolveOptions& options = {});

/// Maps unconstrained logits to strictly increasing angles
/// start < t_1 < ... < t_m < start + span. The m+1 gaps are span*softmax(0, u).
std::vector<double> ordered_angles(double start, double span, std::span<const double> logits);

/// Inverse of ordered_angles.
std::vector<double> ordered_logits(double start, double span, std::span<const double> angles);

/// Root of a continuous real function on a bracketing interval (TOMS 748).
double find_root(const std::function<double(double)>& f, double lo, double hi, double tolerance = 1e-15);

// ---------------------------------------------------------------------------
// Complex ODE dz/ds = field(s, z)

enum class OdeTermination {
    reached_end,
    stopped_by_predicate,
    event_located,
    stopped_at_singularity,
    max_steps,
};

struct OdeSample {
    double s;
    Complex z;
};

struct OdeSolution {
    std::vector<OdeSample> samples; ///< s strictly increasing
    double error_estimate = 0.0;    ///< accumulated local error estimates
    OdeTermination termination = OdeTermination::reached_end;

    bool truncated() const noexcept {
        return termination == OdeTermination::stopped_by_predicate ||
               termination == OdeTermination::stopped_at_singularity ||
               termination == OdeTermination::max_steps;
    }
    const OdeSample& back() const { return samples.back(); }
};

using Field = std::function<Complex(double, Complex)>;

struct OdeOptions {
    double tolerance = 1e-10; ///< per-step local error bound (mixed abs/rel)
    double initial_step = 1e-3;
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 1e-14;
    long max_steps = 1'000'000;
    /// Checked after every accepted step; true stops the integration and the
    /// solution is flagged stopped_by_predicate.
    std::function<bool(double, Complex)> stop;
    /// Terminal event: integration ends where event(s, z) crosses from
    /// negative to non-negative. The crossing is located by bisection on the
    /// step length and appended as the last sample.
    std::function<double(double, Complex)> event;
};

/// Dormand-Prince 5(4) with PI step control. A field that throws DomainError
/// or returns a non-finite value is treated as a rejected step; when the step
/// underflows min_step the solution ends flagged stopped_at_singularity.
OdeSolution integrate_ode(const Field& field, Complex start, double s_begin, double s_end,
                          const OdeOptions& options = {});

// ---------------------------------------------------------------------------
// Limits

struct ExtrapolationSample {
    double h;
    Complex value;
};

struct ExtrapolationResult {
    Complex limit;
    double error = 0.0;
    bool monotone = true; ///< false: raw last value returned, treat with care
    int order = 0;        ///< tableau column of the accepted estimate
};

/// Polynomial (Neville/Richardson) extrapolation of value(h) to h = 0.
/// The accepted entry is the diagonal element with the smallest difference to
/// its predecessor, and that difference is the error estimate. Requires at
/// least three samples with strictly decreasing positive h. If the raw values
/// do not settle (successive differences fail to shrink) the result is flagged
/// non-monotone and the last raw value is returned.
ExtrapolationResult extrapolate_limit(std::span<const ExtrapolationSample> samples);

} // namespace angulus::numerics
