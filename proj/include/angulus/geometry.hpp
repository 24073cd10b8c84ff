#pragma once

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include "angulus/error.hpp"

namespace angulus::geometry {

using Complex = std::complex<double>;

/// A point of the unit circle. The angle is the primary datum; the unimodular
/// value is derived once from it so that repeated use never drifts off |z| = 1.
class BoundaryPoint {
public:
    BoundaryPoint() : BoundaryPoint(0.0) {}
    explicit BoundaryPoint(double angle);

    /// Projects a non-zero complex number radially onto the circle.
    static BoundaryPoint from_complex(Complex z);

    double angle() const noexcept { return angle_; }
    Complex value() const noexcept { return value_; }

private:
    double angle_; ///< normalized to [0, 2 pi)
    Complex value_;
};

/// Counterclockwise angular distance from `from` to `to`, in [0, 2 pi).
double ccw_distance(const BoundaryPoint& from, const BoundaryPoint& to);

/// z -> (a z + b) / (c z + d).
class MobiusMap {
public:
    MobiusMap(Complex a, Complex b, Complex c, Complex d);

    static MobiusMap identity();
    /// z -> e^{i rotation} (z - center) / (1 - conj(center) z), |center| < 1.
    static MobiusMap disk_automorphism(double rotation, Complex center);

    /// nullopt when z is the pole.
    std::optional<Complex> apply(Complex z) const;
    Complex derivative(Complex z) const;
    MobiusMap compose(const MobiusMap& inner) const; ///< this o inner
    MobiusMap inverse() const;

    const std::array<Complex, 4>& coefficients() const noexcept { return coef_; }
    bool is_disk_automorphism() const noexcept { return automorphism_; }

private:
    std::array<Complex, 4> coef_;
    bool automorphism_;
};

std::optional<Complex> mobius_apply(const MobiusMap& m, Complex z);

/// |m'(xi)| at a fixed point xi of the circle. For disk automorphisms this is
/// the angular derivative. Throws DomainError when m(xi) != xi.
double mobius_boundary_derivative(const MobiusMap& m, const BoundaryPoint& xi);

/// Samples z_j = xi (1 - u_j) approaching a boundary point inside a Stolz
/// region {z : |arg(1 - z/xi)| < opening/2}. Offsets are kept explicitly so
/// that z_j - xi = -xi u_j is available without cancellation.
struct ApproachPath {
    BoundaryPoint target;
    double opening = 0.0;
    std::vector<Complex> offsets;

    Complex point(std::size_t j) const { return target.value() * (1.0 - offsets[j]); }
    double radius_offset(std::size_t j) const { return std::abs(offsets[j]); }
    std::size_t size() const noexcept { return offsets.size(); }
};

/// Radial (tilt = 0) or tilted path with |u_j| = (1 - r0) ratio^j and
/// arg u_j = tilt * opening / 2. Requires opening in (0, pi), ratio in (0, 1),
/// n_samples >= 3, |tilt| < 1.
ApproachPath build_approach_path(const BoundaryPoint& xi, double opening, int n_samples, double ratio,
                                 double first_offset = 1e-2, double tilt = 0.0);

/// True when z lies in the open Stolz region of the given opening at xi.
bool in_stolz_region(const BoundaryPoint& xi, double opening, Complex z);

} // namespace angulus::geometry
