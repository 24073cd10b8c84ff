#pragma once

#include <memory>
#include <string>
#include <vector>

#include "angulus/angular.hpp"
#include "angulus/inequality.hpp"

/// Slit strips and their Koenigs functions.
///
/// Omega = {|Im w| < 1/2} minus the rays {Im w = y_k, Re w < gamma_k},
/// y_k = -1/2 + alpha_1 + ... + alpha_k, k = 1..n-1. The Riemann map
/// h : D -> Omega with h(0) = 0, h'(0) > 0 conjugates the semigroup
/// phi_t = h^{-1}(h + t) to translation. Because every vertex of Omega is at
/// infinity or a slit tip, h' is rational and h is a finite sum of logarithms:
///
///   h(z) = -(1/pi) Log(1 - z/a) + sum_k (alpha_k/pi) Log(1 - z/xi_k).
namespace angulus::koenigs {

using Complex = std::complex<double>;
using geometry::BoundaryPoint;

class SlitStripDomain {
public:
    /// alphas: channel widths (positive, sum 1 within 1e-12), listed bottom to
    /// top. gammas: slit tip abscissas (negative), one per slit.
    SlitStripDomain(std::vector<double> alphas, std::vector<double> gammas);

    std::size_t channels() const noexcept { return alphas_.size(); }
    const std::vector<double>& alphas() const noexcept { return alphas_; }
    const std::vector<double>& gammas() const noexcept { return gammas_; }
    /// y_k for k = 0..n (y_0 = -1/2, y_n = 1/2).
    double level(std::size_t k) const { return levels_.at(k); }

    bool contains(Complex w) const;
    /// Mirror image of itself under conjugation.
    bool conjugation_symmetric(double tol = 1e-12) const;

private:
    std::vector<double> alphas_;
    std::vector<double> gammas_;
    std::vector<double> levels_;
};

struct Strip {
    double lower = 0.0;
    double upper = 0.0;
    double width = 0.0;
    std::size_t repulsive_index = 0; ///< channel k <-> xi_k
};

/// V(Omega) = intersection of Omega + t over t >= 0: the n open channels.
struct InvariantSetReport {
    std::vector<Strip> strips;
    double total_width() const;
};

InvariantSetReport invariant_set(const SlitStripDomain& domain);

struct KoenigsCertificate {
    double level_residual = 0.0;  ///< max |Im h - expected level| over boundary arcs
    double tip_residual = 0.0;    ///< max |Re h(w_k) - gamma_k|
    double origin_residual = 0.0; ///< |h(0)|
    double derivative_argument = 0.0; ///< arg h'(0)
    double min_image_separation = 0.0; ///< over the univalence sample
    int univalence_samples = 0;
    int solver_iterations = 0;
    double min_prevertex_gap = 0.0;
    std::vector<std::string> warnings;

    /// max of the level, tip and origin residuals.
    double residual() const;
};

struct BuildOptions {
    double tolerance = 1e-12;
    int univalence_radii = 10;
    int univalence_angles = 100;
};

struct FixedPoints {
    BoundaryPoint denjoy_wolff;
    std::vector<BoundaryPoint> repulsive; ///< xi_1..xi_n, same order as alphas
};

class KoenigsMap {
public:
    const SlitStripDomain& domain() const noexcept { return domain_; }

    /// Prevertices: a, then xi_1..xi_n, then the slit tips w_1..w_{n-1}.
    const BoundaryPoint& denjoy_wolff() const noexcept { return a_; }
    const std::vector<BoundaryPoint>& repulsive() const noexcept { return xi_; }
    const std::vector<BoundaryPoint>& tips() const noexcept { return tips_; }
    /// h'(z) = constant * prod (z - w_j) / ((z - a) prod (z - xi_k)).
    Complex derivative_constant() const noexcept { return constant_; }
    const KoenigsCertificate& certificate() const noexcept { return cert_; }

    /// Closed-form value of h. Throws DomainError "boundary singularity"
    /// within 1e-14 of a channel prevertex, and for |z| >= 1.
    Complex eval(Complex z) const;
    Complex derivative(Complex z) const;

    /// The same value as a contour integral of h' along [0, z]; an
    /// independent check on the closed form.
    Complex eval_by_quadrature(Complex z, double tolerance = 1e-13) const;

    /// h^{-1}(w). Grid-seeded damped Newton carried out in s = Log(1 - z/p)
    /// for the nearest channel prevertex p, so points deep in a channel keep
    /// full relative accuracy. Throws DomainError when w is not in Omega.
    Complex inverse(Complex w) const;

    /// phi_t(xi (1 - u)) - xi for a channel prevertex xi (any point falls back
    /// to plain subtraction), computed without cancellation.
    Complex flow_offset(const BoundaryPoint& xi, Complex u, double t) const;

    /// h^{-1}(w) as z = p (1 - e^s) for a channel prevertex p.
    struct LocalPoint {
        std::size_t channel; ///< 0 = a, k = xi_k
        Complex s;
    };
    LocalPoint inverse_local(Complex w) const;
    /// h at z = p (1 - e^s), without forming z for the p term.
    Complex eval_local(const LocalPoint& pt) const;

private:
    friend KoenigsMap build_koenigs_map(const SlitStripDomain&, const BuildOptions&);
    KoenigsMap(SlitStripDomain domain, BoundaryPoint a, std::vector<BoundaryPoint> xi);

    struct Channel {
        Complex p;
        double c;
    };
    Complex rest(Complex z, std::size_t skip) const;
    /// Newton in s for the channel prevertex `index`; returns s.
    bool solve_local(Complex w, std::size_t index, Complex& s) const;
    std::size_t nearest_channel(Complex z) const;
    void tabulate_seeds();

    SlitStripDomain domain_;
    BoundaryPoint a_;
    std::vector<BoundaryPoint> xi_;
    std::vector<BoundaryPoint> tips_;
    std::vector<Channel> channels_; ///< a first
    Complex constant_;
    KoenigsCertificate cert_;
    std::vector<Complex> seed_points_;
    std::vector<Complex> seed_values_;
};

/// Solves the parameter problem for the prevertices and certifies the result.
/// Throws SolveFailure when the prevertex solve does not converge.
KoenigsMap build_koenigs_map(const SlitStripDomain& domain, const BuildOptions& options = {});

FixedPoints locate_fixed_points(const KoenigsMap& map);

/// phi_t for a fixed map; t >= 0.
class SemigroupElement : public angular::SelfMapEvaluator {
public:
    SemigroupElement(std::shared_ptr<const KoenigsMap> map, double t);

    double time() const noexcept { return t_; }
    const KoenigsMap& map() const noexcept { return *map_; }

    Complex operator()(Complex z) const override;
    Complex boundary_offset(const BoundaryPoint& xi, Complex u) const override;

private:
    std::shared_ptr<const KoenigsMap> map_;
    double t_;
};

Complex semigroup_apply(const SemigroupElement& element, Complex z);

/// log phi_t'(a) = -pi t and log phi_t'(xi_k) = pi t / alpha_k (the
/// Denjoy-Wolff law exp(-pi t / nu) with nu(Omega) = 1).
struct LogMultipliers {
    double denjoy_wolff = 0.0;
    std::vector<double> repulsive;
};
LogMultipliers exact_log_multipliers(const SlitStripDomain& domain, double t);

/// Exact multipliers attached to the located fixed points; t > 0.
inequality::MultiplierData exact_multipliers(const KoenigsMap& map, double t);

/// Estimator options for phi_t: the multipliers e^{pi t / alpha_k} are finite
/// by construction and routinely exceed the generic infinity threshold.
angular::EstimateOptions semigroup_estimate_options();

/// The same table from radial angular-derivative estimates of phi_t, with the
/// extrapolation error attached. Throws ConvergenceError when an estimate does
/// not settle (log-multipliers beyond about 50 need offsets below 1e-25).
inequality::MultiplierData estimated_multipliers(std::shared_ptr<const KoenigsMap> map, double t,
                                                 const angular::EstimateOptions& options = semigroup_estimate_options());

} // namespace angulus::koenigs
