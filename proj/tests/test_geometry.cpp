#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "angulus/geometry.hpp"

using namespace angulus;
using namespace angulus::geometry;
using std::numbers::pi;

namespace {
const MobiusMap half_shift{1.0, 0.5, 0.5, 1.0}; // (z + 1/2) / (1 + z/2)
}

TEST_CASE("mobius_apply examples") {
    const Complex z(0.3, 0.1);
    CHECK(*MobiusMap::identity().apply(z) == z);
    CHECK(std::abs(*half_shift.apply(0.0) - 0.5) < 1e-15);
    CHECK(std::abs(*half_shift.apply(1.0) - 1.0) < 1e-15);
    CHECK_FALSE(half_shift.apply(-2.0).has_value());
    CHECK(half_shift.is_disk_automorphism());
    CHECK_FALSE(MobiusMap(2.0, 0.0, 0.0, 1.0).is_disk_automorphism());
}

TEST_CASE("mobius_boundary_derivative examples") {
    CHECK(mobius_boundary_derivative(MobiusMap::identity(), BoundaryPoint(0.0)) == 1.0);
    // m'(z) = (1 - 1/4) / (1 + z/2)^2
    CHECK(mobius_boundary_derivative(half_shift, BoundaryPoint(0.0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(mobius_boundary_derivative(half_shift, BoundaryPoint(pi)) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK_THROWS_AS(mobius_boundary_derivative(half_shift, BoundaryPoint(pi / 2)), DomainError);
}

TEST_CASE("composition law and chain rule at a shared fixed point") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    for (int trial = 0; trial < 20; ++trial) {
        const MobiusMap m1 = MobiusMap::disk_automorphism(u(rng), Complex(u(rng), u(rng)));
        const MobiusMap m2 = MobiusMap::disk_automorphism(u(rng), Complex(u(rng), u(rng)));
        const Complex z(0.5 * u(rng), 0.5 * u(rng));
        CHECK(std::abs(*m1.compose(m2).apply(z) - *m1.apply(*m2.apply(z))) < 1e-12);
        CHECK(m1.compose(m2).is_disk_automorphism());
    }
    // Hyperbolic automorphisms fixing both 1 and -1: (z + b) / (1 + b z), b real.
    for (double b1 : {0.2, -0.4, 0.6}) {
        for (double b2 : {0.1, 0.5}) {
            const MobiusMap m1{1.0, b1, b1, 1.0};
            const MobiusMap m2{1.0, b2, b2, 1.0};
            for (double angle : {0.0, pi}) {
                const BoundaryPoint xi(angle);
                const double lhs = mobius_boundary_derivative(m1.compose(m2), xi);
                const double rhs = mobius_boundary_derivative(m1, xi) * mobius_boundary_derivative(m2, xi);
                CHECK(std::abs(lhs - rhs) < 1e-12);
            }
        }
    }
}

TEST_CASE("boundary points stay on the circle") {
    const BoundaryPoint p(7.0 * pi / 3.0);
    CHECK(p.angle() == doctest::Approx(pi / 3.0).epsilon(1e-14));
    CHECK(std::abs(std::abs(p.value()) - 1.0) < 1e-15);
    CHECK(BoundaryPoint::from_complex(Complex(0.0, -3.0)).angle() == doctest::Approx(1.5 * pi));
    CHECK(ccw_distance(BoundaryPoint(0.1), BoundaryPoint(6.0)) == doctest::Approx(5.9));
    CHECK(ccw_distance(BoundaryPoint(6.0), BoundaryPoint(0.1)) == doctest::Approx(0.1 + 2 * pi - 6.0));
}

TEST_CASE("approach paths") {
    const auto path = build_approach_path(BoundaryPoint(0.0), pi / 2, 5, 0.5, 0.1);
    REQUIRE(path.size() == 5);
    for (std::size_t j = 0; j < path.size(); ++j) {
        const Complex z = path.point(j);
        CHECK(std::abs(z.imag()) < 1e-15);
        CHECK(z.real() == doctest::Approx(1.0 - 0.1 * std::pow(0.5, j)));
        CHECK(in_stolz_region(path.target, path.opening, z));
    }
    const auto mirrored = build_approach_path(BoundaryPoint(pi), pi / 2, 5, 0.5, 0.1);
    for (std::size_t j = 0; j < path.size(); ++j)
        CHECK(std::abs(mirrored.point(j) + path.point(j)) < 1e-15);

    const auto tilted = build_approach_path(BoundaryPoint(1.0), pi / 3, 6, 0.5, 0.05, 0.5);
    for (std::size_t j = 0; j < tilted.size(); ++j)
        CHECK(in_stolz_region(tilted.target, pi / 3, tilted.point(j)));

    CHECK_THROWS_AS(build_approach_path(BoundaryPoint(0.0), 0.0, 5, 0.5), DomainError);
    CHECK_THROWS_AS(build_approach_path(BoundaryPoint(0.0), pi, 5, 0.5), DomainError);
    CHECK_THROWS_AS(build_approach_path(BoundaryPoint(0.0), 1.0, 2, 0.5), DomainError);
    CHECK_THROWS_AS(build_approach_path(BoundaryPoint(0.0), 1.0, 5, 1.5), DomainError);
}
