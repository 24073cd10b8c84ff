#include "doctest.h"

#include <cmath>
#include <numbers>

#include "angulus/angular.hpp"

using namespace angulus;
using namespace angulus::angular;
using geometry::MobiusMap;
using std::numbers::pi;

namespace {

MobiusMap hyperbolic(double b) { return MobiusMap(1.0, b, b, 1.0); } // fixes 1 and -1

// 1 - sqrt((1 - z)/2): fixes 1 with infinite angular derivative.
class SquareRootCusp : public SelfMapEvaluator {
public:
    Complex operator()(Complex z) const override { return 1.0 - std::sqrt((1.0 - z) / 2.0); }
    Complex boundary_offset(const BoundaryPoint& xi, Complex u) const override {
        if (std::abs(xi.value() - 1.0) > 1e-15)
            return SelfMapEvaluator::boundary_offset(xi, u);
        return -std::sqrt(u / 2.0);
    }
};

} // namespace

TEST_CASE("angular derivative of a hyperbolic automorphism matches the Mobius oracle") {
    const MobiusEvaluator phi(hyperbolic(0.5));
    for (double angle : {0.0, pi}) {
        const BoundaryPoint xi(angle);
        const double oracle = geometry::mobius_boundary_derivative(phi.map(), xi);
        const auto est = estimate_angular_derivative(phi, xi, default_path(xi));
        CHECK(est.multiplier == doctest::Approx(oracle).epsilon(1e-8));
        CHECK(est.error < 1e-6);
        CHECK(est.converged);
        CHECK_FALSE(est.infinite);
        CHECK(est.kind == (angle == 0.0 ? FixedPointClass::attractive : FixedPointClass::repulsive));

        const auto tilted = geometry::build_approach_path(xi, pi / 3, 12, 0.5, 1e-3, 0.6);
        const auto stolz = estimate_angular_derivative(phi, xi, tilted);
        CHECK(std::abs(stolz.multiplier - est.multiplier) <= stolz.error + est.error + 1e-12);
        CHECK(stolz.multiplier == doctest::Approx(oracle).epsilon(1e-8));
    }
    const FunctionEvaluator identity([](Complex z) { return z; });
    CHECK(estimate_angular_derivative(identity, BoundaryPoint(0.0), default_path(BoundaryPoint(0.0))).multiplier ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(estimate_angular_derivative(phi, BoundaryPoint(pi / 2), default_path(BoundaryPoint(pi / 2))),
                    DomainError);
}

TEST_CASE("chain rule for composed maps with a common fixed point") {
    auto m1 = std::make_shared<MobiusEvaluator>(hyperbolic(0.3));
    auto m2 = std::make_shared<MobiusEvaluator>(hyperbolic(-0.6));
    const ComposedEvaluator phi(m1, m2);
    for (double angle : {0.0, pi}) {
        const BoundaryPoint xi(angle);
        const double oracle = geometry::mobius_boundary_derivative(m1->map(), xi) *
                              geometry::mobius_boundary_derivative(m2->map(), xi);
        const auto est = estimate_angular_derivative(phi, xi, default_path(xi));
        CHECK(est.multiplier == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("infinite and non-convergent quotients are non-regular") {
    const SquareRootCusp phi;
    const BoundaryPoint one(0.0);
    // offsets below double resolution of z itself; the evaluator works in u
    ApproachPath deep{one, pi / 2, {}};
    for (int j = 0; j < 12; ++j)
        deep.offsets.push_back(std::pow(0.1, 8 + j));
    const auto inf = estimate_angular_derivative(phi, one, deep);
    CHECK(inf.infinite);
    CHECK(inf.kind == FixedPointClass::non_regular);

    const auto shallow = estimate_angular_derivative(phi, one, default_path(one));
    CHECK_FALSE(shallow.infinite);
    CHECK_FALSE(shallow.converged);
    CHECK(shallow.kind == FixedPointClass::non_regular);
}

TEST_CASE("classify") {
    CHECK(classify(0.5) == FixedPointClass::attractive);
    CHECK(classify(2.0) == FixedPointClass::repulsive);
    CHECK(classify(1.0 + 5e-10) == FixedPointClass::neutral);
    CHECK(classify(1.0 + 5e-9) == FixedPointClass::repulsive);
    CHECK(classify(3.0, true) == FixedPointClass::non_regular);
    CHECK_THROWS_AS(classify(-1.0), DomainError);
}

TEST_CASE("Denjoy-Wolff point") {
    const FunctionEvaluator half([](Complex z) { return z / 2.0; });
    const auto interior = find_denjoy_wolff(half);
    CHECK_FALSE(interior.on_boundary);
    CHECK(std::abs(interior.point) < 1e-14);
    CHECK(interior.multiplier == doctest::Approx(0.5).epsilon(1e-9));

    const FunctionEvaluator shifted([](Complex z) { return 0.25 + 0.5 * z * z; });
    const auto fixed = find_denjoy_wolff(shifted);
    const double root = 1.0 - std::sqrt(0.5); // 0.5 z^2 - z + 0.25 = 0
    CHECK(std::abs(fixed.point - root) < 1e-9);
    CHECK(fixed.multiplier == doctest::Approx(root).epsilon(1e-6));

    const MobiusEvaluator hyp(hyperbolic(0.5));
    const auto boundary = find_denjoy_wolff(hyp);
    CHECK(boundary.on_boundary);
    CHECK(std::abs(boundary.point - 1.0) < 1e-12);
    CHECK(boundary.multiplier == doctest::Approx(1.0 / 3.0).epsilon(1e-8));

    // hyperbolic automorphism with attracting point e^{i}: conjugate by a rotation
    const MobiusMap rot = MobiusMap::disk_automorphism(1.0, 0.0);
    const MobiusEvaluator turned(rot.compose(hyperbolic(0.4)).compose(rot.inverse()));
    const auto tb = find_denjoy_wolff(turned);
    CHECK(std::abs(tb.point - std::polar(1.0, 1.0)) < 1e-12);
    CHECK(tb.multiplier == doctest::Approx((1 - 0.4) / (1 + 0.4)).epsilon(1e-8));

    // elliptic automorphisms: orbit from 0 circles the fixed point 0.3
    const MobiusMap to_center = MobiusMap::disk_automorphism(0.0, 0.3);
    const MobiusEvaluator elliptic(to_center.inverse().compose(MobiusMap::disk_automorphism(0.7, 0.0)).compose(to_center));
    DenjoyWolffOptions few;
    few.max_iterations = 2000;
    CHECK_THROWS_AS(find_denjoy_wolff(elliptic, few), ConvergenceError);
    const FunctionEvaluator rotation([](Complex z) { return std::polar(1.0, 0.7) * z; });
    CHECK_THROWS_AS(find_denjoy_wolff(rotation), DomainError);
}

TEST_CASE("radial table evaluator") {
    const MobiusEvaluator phi(hyperbolic(0.5));
    const BoundaryPoint one(0.0);
    std::vector<double> radii;
    std::vector<Complex> values;
    for (int j = 0; j < 16; ++j) {
        const double u = 1e-2 * std::pow(0.5, j);
        radii.push_back(1.0 - u);
        values.push_back(phi(1.0 - u));
    }
    const RadialTableEvaluator table(one, radii, values);
    const auto path = geometry::build_approach_path(one, pi / 2, 10, 0.5, 5e-3);
    const auto est = estimate_angular_derivative(table, one, path);
    CHECK(est.multiplier == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    CHECK(std::abs(table(Complex(1.0 - 3e-3, 0.0)) - phi(Complex(1.0 - 3e-3, 0.0))) < 1e-9);
    CHECK_THROWS_AS(table(Complex(0.5, 0.1)), DomainError);
    CHECK_THROWS_AS(table(Complex(0.5, 0.0)), DomainError);

    std::vector<double> sparse_r;
    std::vector<Complex> sparse_v;
    for (int j = 0; j < 6; ++j) {
        sparse_r.push_back(1.0 - std::pow(0.1, j + 1));
        sparse_v.push_back(phi(sparse_r.back()));
    }
    CHECK_THROWS_AS(RadialTableEvaluator(one, sparse_r, sparse_v), DomainError);
    CHECK_THROWS_AS(RadialTableEvaluator(one, {0.9, 0.95, 0.97}, {0.9, 0.95, 0.97}), DomainError);
}

TEST_CASE("registry and analyticity certificate") {
    const auto reg = EvaluatorRegistry::with_builtins();
    const auto mob = reg.create("mobius", {{"rotation", 0.2}, {"center_re", 0.1}});
    const Complex z(0.2, -0.3);
    const auto m = MobiusMap::disk_automorphism(0.2, 0.1);
    CHECK(std::abs((*mob)(z) - *m.apply(z)) < 1e-15);
    CHECK(std::abs((*reg.create("dilation", {{"factor", 0.25}}))(z) - 0.25 * z) < 1e-15);
    CHECK_THROWS_AS(reg.create("nope"), DomainError);
    CHECK_THROWS_AS(reg.create("mobius", {{"center_re", 1.5}}), DomainError);

    CHECK(certify_self_map(*reg.create("dilation")).max_modulus < 0.5);
    const FunctionEvaluator expanding([](Complex w) { return 2.0 * w; });
    CHECK_THROWS_AS(certify_self_map(expanding), DomainError);
}
