#include "angulus/angular.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "angulus/numerics.hpp"

namespace angulus::angular {

using numerics::pi;

Complex SelfMapEvaluator::boundary_offset(const BoundaryPoint& xi, Complex u) const {
    return (*this)(xi.value() * (1.0 - u)) - xi.value();
}

MobiusEvaluator::MobiusEvaluator(geometry::MobiusMap m) : m_(std::move(m)) {}

Complex MobiusEvaluator::operator()(Complex z) const {
    auto w = m_.apply(z);
    if (!w)
        throw DomainError("MobiusEvaluator: evaluation at the pole");
    return *w;
}

Complex ComposedEvaluator::boundary_offset(const BoundaryPoint& xi, Complex u) const {
    const Complex inner = inner_->boundary_offset(xi, u);
    return outer_->boundary_offset(xi, -inner / xi.value());
}

// ---------------------------------------------------------------------------

RadialTableEvaluator::RadialTableEvaluator(BoundaryPoint xi, std::vector<double> radii, std::vector<Complex> values)
    : xi_(xi), values_(std::move(values)) {
    if (radii.size() != values_.size())
        throw DomainError("RadialTableEvaluator: radii and values differ in length");
    if (radii.size() < 4)
        throw DomainError("RadialTableEvaluator: at least four samples are required");
    offsets_.reserve(radii.size());
    for (double r : radii) {
        if (!(r > 0.0 && r < 1.0))
            throw DomainError("RadialTableEvaluator: radii must lie in (0, 1)");
        offsets_.push_back(1.0 - r);
    }
    for (std::size_t j = 1; j < offsets_.size(); ++j) {
        if (!(offsets_[j] < offsets_[j - 1]))
            throw DomainError("RadialTableEvaluator: radii must increase strictly");
        if (offsets_[j] < offsets_[j - 1] / 2.5)
            throw DomainError("RadialTableEvaluator: sampling too sparse near the boundary");
    }
}

Complex RadialTableEvaluator::interpolate(double u) const {
    const double tol = 1e-12;
    if (u > offsets_.front() * (1 + tol) || u < offsets_.back() * (1 - tol))
        throw DomainError("RadialTableEvaluator: outside the tabulated range");
    // four nearest nodes
    std::size_t j = 0;
    while (j + 1 < offsets_.size() && offsets_[j + 1] >= u)
        ++j;
    std::size_t first = j >= 1 ? j - 1 : 0;
    first = std::min(first, offsets_.size() - 4);
    Complex acc = 0.0;
    for (std::size_t a = first; a < first + 4; ++a) {
        double weight = 1.0;
        for (std::size_t b = first; b < first + 4; ++b)
            if (b != a)
                weight *= (u - offsets_[b]) / (offsets_[a] - offsets_[b]);
        acc += weight * (values_[a] - xi_.value());
    }
    return acc;
}

Complex RadialTableEvaluator::operator()(Complex z) const {
    const Complex rel = z / xi_.value();
    if (std::abs(rel.imag()) > 1e-12 * std::max(1.0, std::abs(rel)) || rel.real() <= 0.0)
        throw DomainError("RadialTableEvaluator: point is off the tabulated radius");
    return xi_.value() + interpolate(1.0 - rel.real());
}

Complex RadialTableEvaluator::boundary_offset(const BoundaryPoint& xi, Complex u) const {
    if (std::abs(xi.value() - xi_.value()) > 1e-14 || std::abs(u.imag()) > 1e-14 * std::abs(u))
        throw DomainError("RadialTableEvaluator: point is off the tabulated radius");
    return interpolate(u.real());
}

// ---------------------------------------------------------------------------

EvaluatorRegistry EvaluatorRegistry::with_builtins() {
    EvaluatorRegistry reg;
    const auto get = [](const Parameters& p, const std::string& key, double fallback) {
        auto it = p.find(key);
        return it == p.end() ? fallback : it->second;
    };
    reg.add("identity", [](const Parameters&) {
        return std::make_shared<FunctionEvaluator>([](Complex z) { return z; });
    });
    reg.add("dilation", [get](const Parameters& p) {
        const double s = get(p, "factor", 0.5);
        if (!(std::abs(s) <= 1.0))
            throw DomainError("dilation: |factor| must not exceed 1");
        return std::make_shared<FunctionEvaluator>([s](Complex z) { return s * z; });
    });
    reg.add("mobius", [get](const Parameters& p) {
        const Complex c(get(p, "center_re", 0.0), get(p, "center_im", 0.0));
        if (!(std::abs(c) < 1.0))
            throw DomainError("mobius: the center must lie in the disk");
        return std::make_shared<MobiusEvaluator>(geometry::MobiusMap::disk_automorphism(get(p, "rotation", 0.0), c));
    });
    return reg;
}

void EvaluatorRegistry::add(const std::string& name, Factory factory) { factories_[name] = std::move(factory); }

std::shared_ptr<const SelfMapEvaluator> EvaluatorRegistry::create(const std::string& name,
                                                                  const Parameters& params) const {
    auto it = factories_.find(name);
    if (it == factories_.end())
        throw DomainError("unknown evaluator '" + name + "'");
    return it->second(params);
}

std::vector<std::string> EvaluatorRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : factories_)
        out.push_back(name);
    return out;
}

AnalyticityCertificate certify_self_map(const SelfMapEvaluator& phi, int n_radii, int n_angles) {
    AnalyticityCertificate cert;
    for (int i = 0; i <= n_radii; ++i) {
        const double r = 0.99 * i / n_radii;
        for (int k = 0; k < (i == 0 ? 1 : n_angles); ++k) {
            const Complex w = phi(std::polar(r, 2 * pi * k / n_angles));
            const double m = std::abs(w);
            if (!std::isfinite(m) || m >= 1.0)
                throw DomainError("certify_self_map: value outside the unit disk");
            cert.max_modulus = std::max(cert.max_modulus, m);
            ++cert.samples;
        }
    }
    return cert;
}

// ---------------------------------------------------------------------------

FixedPointClass classify(double multiplier, bool infinite, const ClassifyOptions& options) {
    if (infinite || !std::isfinite(multiplier))
        return FixedPointClass::non_regular;
    if (!(multiplier > 0.0))
        throw DomainError("classify: multipliers at boundary fixed points are positive");
    if (std::abs(multiplier - 1.0) <= options.neutral_band)
        return FixedPointClass::neutral;
    return multiplier < 1.0 ? FixedPointClass::attractive : FixedPointClass::repulsive;
}

const char* to_string(FixedPointClass c) {
    switch (c) {
    case FixedPointClass::attractive:
        return "attractive";
    case FixedPointClass::neutral:
        return "neutral";
    case FixedPointClass::repulsive:
        return "repulsive";
    default:
        return "non_regular";
    }
}

ApproachPath default_path(const BoundaryPoint& xi, double first_offset) {
    // offsets below double resolution are kept in u; only z itself rounds
    ApproachPath path{xi, pi / 2, {}};
    if (!(first_offset > 0.0 && first_offset < 1.0))
        throw DomainError("default_path: first offset must lie in (0, 1)");
    for (int j = 0; j < 12; ++j)
        path.offsets.emplace_back(first_offset * std::pow(0.5, j));
    return path;
}

BoundaryFixedPoint estimate_angular_derivative(const SelfMapEvaluator& phi, const BoundaryPoint& xi,
                                               const ApproachPath& path, const EstimateOptions& options) {
    if (path.size() < 3)
        throw DomainError("estimate_angular_derivative: at least three path samples are required");
    std::vector<numerics::ExtrapolationSample> offsets;
    std::vector<numerics::ExtrapolationSample> quotients;
    double largest = 0.0;
    for (std::size_t j = 0; j < path.size(); ++j) {
        const Complex u = path.offsets[j];
        const Complex d = phi.boundary_offset(xi, u);
        if (!std::isfinite(d.real()) || !std::isfinite(d.imag()))
            throw DomainError("estimate_angular_derivative: non-finite evaluation");
        const Complex q = d / (-xi.value() * u);
        offsets.push_back({std::abs(u), d});
        quotients.push_back({std::abs(u), q});
        largest = std::max(largest, std::abs(q));
    }
    // Fixed when the offsets extrapolate to 0, or (Holder-type approach)
    // decay at least like |u|^{1/4} across the path.
    const auto lim = numerics::extrapolate_limit(offsets);
    const double decay = std::abs(offsets.back().value) / std::abs(offsets.front().value);
    const bool power_decay = decay <= std::pow(offsets.back().h / offsets.front().h, 0.25);
    if (std::abs(lim.limit) > options.fixed_point_tolerance &&
        std::abs(offsets.back().value) > options.fixed_point_tolerance && !power_decay)
        throw DomainError("estimate_angular_derivative: not a boundary fixed point");

    BoundaryFixedPoint out;
    out.location = xi;
    if (largest > options.infinity_threshold) {
        out.infinite = true;
        out.multiplier = std::numeric_limits<double>::infinity();
        out.error = std::numeric_limits<double>::infinity();
        out.kind = FixedPointClass::non_regular;
        return out;
    }
    const auto q = numerics::extrapolate_limit(quotients);
    out.multiplier = q.limit.real();
    out.error = q.error + std::abs(q.limit.imag());
    out.converged = q.monotone;
    out.kind = q.monotone ? classify(out.multiplier) : FixedPointClass::non_regular;
    return out;
}

BoundaryFixedPoint estimate_angular_derivative_adaptive(const SelfMapEvaluator& phi, const BoundaryPoint& xi,
                                                        const EstimateOptions& options) {
    std::optional<BoundaryFixedPoint> best;
    const auto relative = [](const BoundaryFixedPoint& e) {
        return e.infinite || !e.converged ? std::numeric_limits<double>::infinity() : e.error / e.multiplier;
    };
    std::optional<DomainError> failure;
    for (double u0 = 1e-3; u0 >= 1e-25; u0 *= 1e-2) {
        // a large multiplier pushes phi(z) far from xi on shallow paths
        BoundaryFixedPoint est;
        try {
            est = estimate_angular_derivative(phi, xi, default_path(xi, u0), options);
        } catch (const DomainError& e) {
            failure = e;
            continue;
        }
        if (!best || relative(est) < relative(*best) || (est.infinite && !best->converged))
            best = est;
        if (relative(*best) < 1e-10)
            break;
    }
    if (!best)
        throw *failure;
    return *best;
}

DenjoyWolffPoint find_denjoy_wolff(const SelfMapEvaluator& phi, const DenjoyWolffOptions& options) {
    Complex z = 0.0;
    for (int it = 1; it <= options.max_iterations; ++it) {
        const Complex next = phi(z);
        if (!(std::abs(next) < 1.0))
            throw DomainError("find_denjoy_wolff: iterate left the disk");
        const double step = std::abs(next - z);
        z = next;
        if (1.0 - std::abs(z) < options.boundary_proximity) {
            // push closer while the orbit keeps moving outward, so the
            // direction z/|z| is accurate to well below the path offsets
            for (int extra = 0; extra < 10000 && 1.0 - std::abs(z) > 1e-14; ++extra) {
                const Complex w = phi(z);
                if (!(std::abs(w) > std::abs(z)) || !(std::abs(w) < 1.0))
                    break;
                z = w;
            }
            DenjoyWolffPoint out;
            out.on_boundary = true;
            const BoundaryPoint a = BoundaryPoint::from_complex(z);
            out.point = a.value();
            out.iterations = it;
            const auto est = estimate_angular_derivative(phi, a, default_path(a));
            out.multiplier = est.multiplier;
            out.error = est.error;
            return out;
        }
        if (step < options.cauchy_tolerance) {
            DenjoyWolffPoint out;
            out.point = z;
            out.iterations = it;
            const double h = 1e-5 * std::max(1e-3, 1.0 - std::abs(z));
            const Complex d1 = (phi(z + h) - phi(z - h)) / (2 * h);
            const Complex d2 = (phi(z + Complex(0, h)) - phi(z - Complex(0, h))) / Complex(0, 2 * h);
            out.multiplier = std::abs(d1);
            out.error = std::abs(d1 - d2);
            if (out.multiplier > 1.0 - 1e-9)
                throw DomainError("find_denjoy_wolff: interior fixed point with |phi'| = 1 (elliptic automorphism)");
            return out;
        }
    }
    throw ConvergenceError("find_denjoy_wolff: possible rotation, the orbit neither converges nor reaches the boundary",
                           std::abs(z), 0.0);
}

} // namespace angulus::angular
