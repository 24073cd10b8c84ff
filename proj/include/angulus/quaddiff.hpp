#pragma once

#include <string>
#include <vector>

#include "angulus/angular.hpp"
#include "angulus/numerics.hpp"

/// The star quadratic differential
///
///   Q(z) dz^2 = A prod_j (z - e^{i beta_j})^2 / ((z - a)^2 prod_k (z - xi_k)^2) dz^2
///
/// with double poles at a and the xi_k and double zeros on the circle. Its
/// square root R(z) = sqrt(A) prod (z - e^{i beta_j}) / ((z - a) prod (z - xi_k))
/// is a single-valued rational function, so a continuous branch of sqrt(Q) is
/// R or -R globally and branch tracking reduces to fixing the sign once.
namespace angulus::quaddiff {

using Complex = std::complex<double>;
using geometry::BoundaryPoint;

struct StarQuadDiff {
    BoundaryPoint a;
    std::vector<BoundaryPoint> xi;
    std::vector<BoundaryPoint> zeros; ///< e^{i beta_j}, zero j between xi_j and xi_{j+1}
    Complex A{1.0, 0.0};
    std::vector<double> alphas;       ///< target heights

    // solver diagnostics
    int iterations = 0;
    double residual = 0.0;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return xi.size(); }
    /// beta_j in [0, 2 pi)
    std::vector<double> betas() const;
    /// sqrt(A) with arg in (-pi/2, pi/2].
    Complex sqrt_A() const;
};

/// Throws DomainError "pole at a" / "pole at xi_k" on a pole.
Complex eval_Q(const StarQuadDiff& qd, Complex z);
/// The branch R above.
Complex sqrt_Q(const StarQuadDiff& qd, Complex z);

/// arg A that makes Q(z)(iz)^2 real positive on the circle, for given points.
double circle_argument(const StarQuadDiff& qd);

/// pi |Res_{xi_k} R|, the height of the strip domain at xi_k when the circle is
/// a trajectory.
std::vector<double> residue_heights(const StarQuadDiff& qd);

struct SolveOptions {
    std::vector<double> initial_betas; ///< empty: arc midpoints
    double tolerance = 1e-13;
    int max_iterations = 100;
};

/// Fits beta_j and A so that the circle is a trajectory and the strip domain at
/// xi_k has height alpha_k. The zero beta_j is kept on the arc from xi_j to
/// xi_{j+1} that avoids a; either cyclic orientation of the xi is accepted.
/// Throws DomainError for invalid input and numerics::SolveFailure when Newton
/// does not converge.
StarQuadDiff solve_parameters(const BoundaryPoint& a, const std::vector<BoundaryPoint>& xi,
                              const std::vector<double>& alphas, const SolveOptions& options = {});

/// max over a theta grid of |Im(Q (iz)^2)| / |Q (iz)^2|, skipping points within
/// `exclusion` of a pole or zero.
double circle_trajectory_residual(const StarQuadDiff& qd, int samples = 4000, double exclusion = 1e-2);

enum class TrajectoryType { trajectory, orthogonal };

enum class Termination { reached_length, reached_circle, hit_pole, hit_critical_point, step_failure };
const char* to_string(Termination t);

struct Trajectory {
    std::vector<Complex> points;
    std::vector<double> lengths; ///< natural parameter int |sqrt(Q)| |dz| at each point
    TrajectoryType type = TrajectoryType::trajectory;
    Termination termination = Termination::reached_length;
};

struct TraceOptions {
    double tolerance = 1e-12;
    double max_step = 1e-2;      ///< in the natural parameter
    double pole_radius = 1e-6;
    double critical_radius = 1e-5;
    /// +1: the direction that turns counterclockwise about 0 at the start;
    /// -1: the opposite one.
    int direction = 1;
};

/// dz/ds = e^{i chi} / sqrt(Q(z)), chi = 0 or pi/2. Starting strictly inside
/// the disk the trace stops on reaching the circle. Throws DomainError
/// "hit critical point" when z0 is a zero and "pole" when z0 is a pole.
Trajectory trace_trajectory(const StarQuadDiff& qd, Complex z0, TrajectoryType type, double max_length,
                            const TraceOptions& options = {});

/// Heights measured by tracing: for each xi_k, the natural length of the
/// orthogonal trajectory through a point just inside xi_k, from circle to
/// circle. Throws ConvergenceError carrying the location when the trajectory
/// runs into a zero.
std::vector<double> heights(const StarQuadDiff& qd);

/// A copy with A scaled by s > 0 (heights scale by sqrt(s)).
StarQuadDiff scaled(const StarQuadDiff& qd, double s);

struct OdeResidual {
    double max_residual = 0.0;
    Complex worst_point;
    int evaluated = 0;
    int skipped = 0;
};

/// max |phi'(z) - F(z, phi(z))| over an interior polar grid, with
/// F(z, w) = (w - a) prod (z - e^{i beta}) prod (w - xi) / ((z - a) prod (w - e^{i beta}) prod (z - xi))
/// and phi' from central differences with step 1e-6. Points where z or
/// phi(z) is within `exclusion` of a singular point of F are skipped.
OdeResidual extremal_ode_residual(const StarQuadDiff& qd, const angular::SelfMapEvaluator& phi,
                                  double exclusion = 1e-2, int n_radii = 9, int n_angles = 48);

/// The critical trajectory entering the disk from each zero, traced for at
/// most `max_length`. Each polyline starts at the zero and lengths count from it.
std::vector<Trajectory> slit_arcs(const StarQuadDiff& qd, double max_length, const TraceOptions& options = {});

/// Symmetric Hausdorff distance between two polylines (vertices against
/// segments).
double hausdorff_distance(const std::vector<Complex>& p, const std::vector<Complex>& q);

/// Hausdorff distance between a sampled forward orbit and the trajectory
/// traced from orbit[0], in the direction of orbit[1], for natural length
/// `length`.
double orbit_trajectory_distance(const StarQuadDiff& qd, const std::vector<Complex>& orbit, double length,
                                 double max_step = 1e-3);

} // namespace angulus::quaddiff
