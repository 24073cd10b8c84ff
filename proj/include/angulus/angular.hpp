#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "angulus/geometry.hpp"

namespace angulus::angular {

using geometry::ApproachPath;
using geometry::BoundaryPoint;
using Complex = std::complex<double>;

/// An analytic self-map of the unit disk, seen only through evaluation.
class SelfMapEvaluator {
public:
    virtual ~SelfMapEvaluator() = default;

    virtual Complex operator()(Complex z) const = 0;

    /// phi(xi (1 - u)) - xi. Implementations that can keep full relative
    /// precision as u -> 0 override this; the default subtracts.
    virtual Complex boundary_offset(const BoundaryPoint& xi, Complex u) const;
};

/// Wraps any callable.
class FunctionEvaluator : public SelfMapEvaluator {
public:
    explicit FunctionEvaluator(std::function<Complex(Complex)> f) : f_(std::move(f)) {}
    Complex operator()(Complex z) const override { return f_(z); }

private:
    std::function<Complex(Complex)> f_;
};

class MobiusEvaluator : public SelfMapEvaluator {
public:
    explicit MobiusEvaluator(geometry::MobiusMap m);
    Complex operator()(Complex z) const override;
    const geometry::MobiusMap& map() const noexcept { return m_; }

private:
    geometry::MobiusMap m_;
};

/// outer o inner. Boundary offsets are chained, which is exact when xi is a
/// fixed point of inner.
class ComposedEvaluator : public SelfMapEvaluator {
public:
    ComposedEvaluator(std::shared_ptr<const SelfMapEvaluator> outer,
                      std::shared_ptr<const SelfMapEvaluator> inner)
        : outer_(std::move(outer)), inner_(std::move(inner)) {}
    Complex operator()(Complex z) const override { return (*outer_)((*inner_)(z)); }
    Complex boundary_offset(const BoundaryPoint& xi, Complex u) const override;

private:
    std::shared_ptr<const SelfMapEvaluator> outer_;
    std::shared_ptr<const SelfMapEvaluator> inner_;
};

/// Tabulated values phi(r xi) along one radius, interpolated by a local cubic
/// in u = 1 - r. Evaluation off the radius or outside the tabulated range is
/// rejected. The table itself is rejected when it has fewer than four samples
/// or when consecutive offsets 1 - r shrink by more than a factor 2.5.
class RadialTableEvaluator : public SelfMapEvaluator {
public:
    RadialTableEvaluator(BoundaryPoint xi, std::vector<double> radii, std::vector<Complex> values);
    Complex operator()(Complex z) const override;
    Complex boundary_offset(const BoundaryPoint& xi, Complex u) const override;

private:
    Complex interpolate(double u) const;
    BoundaryPoint xi_;
    std::vector<double> offsets_; ///< 1 - r, decreasing
    std::vector<Complex> values_;
};

/// Named closed-form evaluators ("identity", "mobius", "dilation", ...).
class EvaluatorRegistry {
public:
    using Parameters = std::map<std::string, double>;
    using Factory = std::function<std::shared_ptr<const SelfMapEvaluator>(const Parameters&)>;

    /// Registry pre-populated with identity, dilation {factor}, and
    /// mobius {rotation, center_re, center_im} (a disk automorphism).
    static EvaluatorRegistry with_builtins();

    void add(const std::string& name, Factory factory);
    std::shared_ptr<const SelfMapEvaluator> create(const std::string& name, const Parameters& params = {}) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, Factory> factories_;
};

struct AnalyticityCertificate {
    double max_modulus = 0.0;
    int samples = 0;
};

/// Max |phi| over a polar grid (radii up to 0.99). Throws DomainError when a
/// value leaves the open disk.
AnalyticityCertificate certify_self_map(const SelfMapEvaluator& phi, int n_radii = 12, int n_angles = 48);

// ---------------------------------------------------------------------------

enum class FixedPointClass { attractive, neutral, repulsive, non_regular };

struct ClassifyOptions {
    double neutral_band = 1e-9;
};

FixedPointClass classify(double multiplier, bool infinite = false, const ClassifyOptions& options = {});
const char* to_string(FixedPointClass c);

struct EstimateOptions {
    double infinity_threshold = 1e8;
    double fixed_point_tolerance = 1e-6;
};

struct BoundaryFixedPoint {
    BoundaryPoint location;
    double multiplier = 0.0; ///< meaningful when !infinite
    double error = 0.0;
    bool infinite = false;
    bool converged = true; ///< false: the quotients did not settle
    FixedPointClass kind = FixedPointClass::non_regular;
};

/// Angular derivative lim (phi(z) - xi)/(z - xi) along the path, extrapolated
/// to the boundary. Error estimates come from the extrapolation tableau (plus
/// the imaginary part of the limit, which vanishes in exact arithmetic); they
/// are heuristics, not bounds. Throws DomainError "not a boundary fixed point"
/// when phi(z_j) does not tend to xi.
BoundaryFixedPoint estimate_angular_derivative(const SelfMapEvaluator& phi, const BoundaryPoint& xi,
                                               const ApproachPath& path, const EstimateOptions& options = {});

/// Radial path used by default: 12 samples from offset 1e-3, ratio 1/2.
ApproachPath default_path(const BoundaryPoint& xi, double first_offset = 1e-3);

/// Radial estimate with the path pushed toward xi (first offsets 1e-3,
/// 1e-5, ...) until the relative error estimate drops below 1e-10 or the
/// offsets reach 1e-25; the estimate with the smallest relative error wins.
/// Paths on which phi(z) does not approach xi are skipped; DomainError is
/// thrown only when that happens on every path.
/// Large multipliers need offsets far below 1/multiplier, which only
/// evaluators with an accurate boundary_offset can supply.
BoundaryFixedPoint estimate_angular_derivative_adaptive(const SelfMapEvaluator& phi, const BoundaryPoint& xi,
                                                        const EstimateOptions& options = {});

struct DenjoyWolffOptions {
    int max_iterations = 100000;
    double cauchy_tolerance = 1e-10;
    double boundary_proximity = 1e-8;
};

struct DenjoyWolffPoint {
    Complex point;
    bool on_boundary = false;
    double multiplier = 0.0; ///< |phi'(a)|, the angular derivative when on the boundary
    double error = 0.0;
    int iterations = 0;
};

/// Iterates z_{n+1} = phi(z_n) from 0. Interior limits are returned with
/// |phi'(a)| from central differences; boundary limits with the radial
/// angular derivative. Throws ConvergenceError "possible rotation" when
/// neither criterion is met within max_iterations.
DenjoyWolffPoint find_denjoy_wolff(const SelfMapEvaluator& phi, const DenjoyWolffOptions& options = {});

} // namespace angulus::angular
