#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "angulus/koenigs.hpp"
#include "angulus/numerics.hpp"

/// Digons and reduced moduli.
///
/// Convention. For the truncation D_eps = D minus the disks |z - v| < eps at
/// both vertices, M(D_eps) is the modulus of the quadrilateral whose
/// distinguished sides are the two truncation arcs (a rectangle of length L
/// and width 1 has modulus L). Then
///
///   m(D, a, b) = lim_{eps -> 0} M(D_eps) + (1/delta_a) log eps + (1/delta_b) log eps.
///
/// With this normalization m(D, -1, 1) = (2/pi) log 2 for the unit disk, and
/// a conformal map T fixing the picture shifts m by
/// (1/delta_a) log|T'(a)| + (1/delta_b) log|T'(b)| (change_of_variable).
namespace angulus::moduli {

using Complex = std::complex<double>;
using geometry::BoundaryPoint;

/// (D, a, b) with a chart from S = {0 < Im w < 1} onto D. Re w -> -inf is
/// the vertex a, Re w -> +inf the vertex b. The inverse chart returns nullopt
/// where it is not defined; values with Im outside (0, 1) mean "not in D".
class Digon {
public:
    using Chart = std::function<Complex(Complex)>;
    using InverseChart = std::function<std::optional<Complex>(Complex)>;

    Digon(Chart chart, InverseChart inverse, BoundaryPoint a, BoundaryPoint b, double delta_a, double delta_b);

    /// (D, -1, 1) with chart tanh(pi (w - i/2) / 2), angles (pi, pi).
    static Digon unit_disk();

    /// T(D) for a disk automorphism T.
    Digon transformed(const geometry::MobiusMap& t) const;
    /// f(D) for a univalent self-map f that fixes both vertices and is
    /// conformal there (angles are kept). f_inverse returns nullopt off f(D).
    Digon mapped(Chart f, InverseChart f_inverse) const;

    Complex chart(Complex w) const { return chart_(w); }
    std::optional<Complex> inverse(Complex z) const { return inverse_(z); }
    bool contains(Complex z) const;

    const BoundaryPoint& a() const noexcept { return a_; }
    const BoundaryPoint& b() const noexcept { return b_; }
    double delta_a() const noexcept { return delta_a_; }
    double delta_b() const noexcept { return delta_b_; }

private:
    Chart chart_;
    InverseChart inverse_;
    BoundaryPoint a_;
    BoundaryPoint b_;
    double delta_a_;
    double delta_b_;
};

struct ModulusOptions {
    double first_eps = 0.05;
    double ratio = 0.5;
    int levels = 8;  ///< extrapolation window
    double min_eps = 1e-6; ///< halving stops here
    int nodes = 32; ///< Gauss-Legendre nodes across the strip
    double tolerance = 1e-6; ///< accepted extrapolation error
};

struct ReducedModulus {
    double value = 0.0;
    double error = 0.0;
    std::vector<numerics::ExtrapolationSample> samples; ///< (eps, m(eps))
};

/// Modulus of D_eps, as the mean over 0 < y < 1 of the chart width between
/// the two truncation arcs. It differs from the exact quadrilateral modulus by
/// a term that vanishes with eps, so both regularize to the same m.
double truncated_modulus(const Digon& d, double eps, int nodes = 32);

/// M(D_eps) + (1/delta_a + 1/delta_b) log eps.
double regularized_modulus(const Digon& d, double eps, int nodes = 32);

/// Extrapolates regularized_modulus over eps = first_eps * ratio^j, using the
/// last `levels` samples. Near crowded prevertices the expansion in eps only
/// takes hold for small eps, so eps keeps shrinking (down to min_eps) until the
/// error estimate drops below tolerance / 10; the best window wins. Throws
/// ConvergenceError "reduced modulus does not stabilize" when no window is
/// monotone with error below options.tolerance.
ReducedModulus reduced_modulus(const Digon& d, const ModulusOptions& options = {});

/// Opening of D at a vertex, from the angular extent of the truncation arc
/// inside D, extrapolated in eps.
struct AngleEstimate {
    double value = 0.0;
    double error = 0.0;
};
AngleEstimate vertex_angle(const Digon& d, bool at_a, const ModulusOptions& options = {});

/// m + (1/delta_a) log da + (1/delta_b) log db.
double change_of_variable(double m, double delta_a, double delta_b, double da, double db);

// ---------------------------------------------------------------------------

struct DigonSystem {
    BoundaryPoint center;                ///< a
    std::vector<BoundaryPoint> endpoints; ///< xi_k
    std::vector<double> heights;         ///< alpha_k
    std::vector<Digon> digons;
    std::vector<std::optional<ReducedModulus>> moduli;
    /// index sets: every digon meets a; digon k alone meets xi_k
    std::vector<std::size_t> at_center() const;

    /// delta_k(c) = pi alpha_k / sum_{j in I_c} alpha_j.
    double compatible_angle_at_center(std::size_t k) const;
    double compatible_angle_at_endpoint(std::size_t k) const;
};

/// D_k = h^{-1}({y_{k-1} < Im w < y_k}) as (D_k, a, xi_k), with chart
/// w -> h^{-1}(-alpha_k w + i y_k + t). For t > 0 the charts describe
/// phi_t(D_k). Throws DomainError "weights must match channel widths".
DigonSystem extremal_star_system(std::shared_ptr<const koenigs::KoenigsMap> map, std::span<const double> alphas,
                                 double t = 0.0);

/// Attaches reduced moduli to every digon.
void compute_moduli(DigonSystem& system, const ModulusOptions& options = {});

/// sum alpha_k^2 m_k. Throws DomainError when a modulus is missing.
double weighted_modulus_sum(const DigonSystem& system);

/// Monte Carlo non-overlap: chart images of interior sample points of each
/// digon are tested against every other digon. Returns the number of
/// collisions found.
int sampled_overlaps(const DigonSystem& system, int samples_per_digon = 200, unsigned seed = 7);

/// The same system pushed forward by a univalent self-map fixing a and every
/// xi_k, conformal at those points.
DigonSystem image_system(const DigonSystem& system, const Digon::Chart& f, const Digon::InverseChart& f_inverse);

} // namespace angulus::moduli
