#include "angulus/geometry.hpp"

#include <cmath>
#include <numbers>

namespace angulus::geometry {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double fixed_point_tolerance = 1e-12;
} // namespace

BoundaryPoint::BoundaryPoint(double angle) {
    angle_ = std::fmod(angle, two_pi);
    if (angle_ < 0.0)
        angle_ += two_pi;
    value_ = std::polar(1.0, angle_);
}

BoundaryPoint BoundaryPoint::from_complex(Complex z) {
    if (z == 0.0)
        throw DomainError("BoundaryPoint: zero has no direction");
    return BoundaryPoint(std::arg(z));
}

double ccw_distance(const BoundaryPoint& from, const BoundaryPoint& to) {
    double d = to.angle() - from.angle();
    if (d < 0.0)
        d += two_pi;
    return d;
}

MobiusMap::MobiusMap(Complex a, Complex b, Complex c, Complex d)
    : coef_{a, b, c, d}, automorphism_(false) {
    if (std::abs(a * d - b * c) == 0.0)
        throw DomainError("MobiusMap: zero determinant");
    // Automorphism of the disk: maps three circle points into the circle and 0 into the disk.
    bool on_circle = true;
    for (double t : {0.3, 2.1, 4.4}) {
        const Complex z = std::polar(1.0, t);
        const Complex den = c * z + d;
        if (std::abs(den) == 0.0) {
            on_circle = false;
            break;
        }
        on_circle = on_circle && std::abs(std::abs((a * z + b) / den) - 1.0) < 1e-12;
    }
    automorphism_ = on_circle && std::abs(d) > 0.0 && std::abs(b / d) < 1.0;
}

MobiusMap MobiusMap::identity() { return {1.0, 0.0, 0.0, 1.0}; }

MobiusMap MobiusMap::disk_automorphism(double rotation, Complex center) {
    if (!(std::abs(center) < 1.0))
        throw DomainError("disk_automorphism: center must lie in the open disk");
    const Complex e = std::polar(1.0, rotation);
    return {e, -e * center, -std::conj(center), 1.0};
}

std::optional<Complex> MobiusMap::apply(Complex z) const {
    const auto& [a, b, c, d] = coef_;
    const Complex den = c * z + d;
    if (den == 0.0)
        return std::nullopt;
    return (a * z + b) / den;
}

Complex MobiusMap::derivative(Complex z) const {
    const auto& [a, b, c, d] = coef_;
    const Complex den = c * z + d;
    if (den == 0.0)
        throw DomainError("MobiusMap::derivative: pole");
    return (a * d - b * c) / (den * den);
}

MobiusMap MobiusMap::compose(const MobiusMap& inner) const {
    const auto& [a, b, c, d] = coef_;
    const auto& [p, q, r, s] = inner.coef_;
    return {a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s};
}

MobiusMap MobiusMap::inverse() const {
    const auto& [a, b, c, d] = coef_;
    return {d, -b, -c, a};
}

std::optional<Complex> mobius_apply(const MobiusMap& m, Complex z) { return m.apply(z); }

double mobius_boundary_derivative(const MobiusMap& m, const BoundaryPoint& xi) {
    const auto image = m.apply(xi.value());
    if (!image || std::abs(*image - xi.value()) > fixed_point_tolerance)
        throw DomainError("mobius_boundary_derivative: not a fixed point");
    return std::abs(m.derivative(xi.value()));
}

bool in_stolz_region(const BoundaryPoint& xi, double opening, Complex z) {
    if (!(std::abs(z) < 1.0))
        return false;
    const Complex u = 1.0 - z / xi.value();
    return u != 0.0 && std::abs(std::arg(u)) < 0.5 * opening;
}

ApproachPath build_approach_path(const BoundaryPoint& xi, double opening, int n_samples, double ratio,
                                 double first_offset, double tilt) {
    if (!(opening > 0.0 && opening < std::numbers::pi))
        throw DomainError("build_approach_path: opening must lie in (0, pi)");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw DomainError("build_approach_path: ratio must lie in (0, 1)");
    if (n_samples < 3)
        throw DomainError("build_approach_path: need at least three samples");
    if (!(std::abs(tilt) < 1.0))
        throw DomainError("build_approach_path: tilt must lie in (-1, 1)");
    if (!(first_offset > 0.0 && first_offset < 1.0))
        throw DomainError("build_approach_path: first offset must lie in (0, 1)");

    ApproachPath path;
    path.target = xi;
    path.opening = opening;
    const Complex direction = std::polar(1.0, 0.5 * tilt * opening);
    double rho = first_offset;
    for (int j = 0; j < n_samples; ++j, rho *= ratio) {
        path.offsets.push_back(rho * direction);
        if (!in_stolz_region(xi, opening, path.point(path.size() - 1)))
            throw DomainError("build_approach_path: sample leaves the Stolz region");
    }
    return path;
}

} // namespace angulus::geometry
