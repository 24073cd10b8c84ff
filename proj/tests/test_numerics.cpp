#include "doctest.h"

#include <cmath>
#include <random>

#include "angulus/numerics.hpp"

using namespace angulus;
using namespace angulus::numerics;

namespace {

// Independent oracle: adaptive Simpson on open panels (midpoint-based, never
// touches the endpoints), bisecting until the two-level difference is small.
double simpson_oracle(const std::function<double(double)>& f, double a, double b, double tol,
                      int depth = 0) {
    auto open_rule = [&](double lo, double hi) {
        // Milne's open Newton-Cotes rule on four subintervals.
        const double h = (hi - lo) / 4.0;
        return 4.0 * h / 3.0 * (2.0 * f(lo + h) - f(lo + 2 * h) + 2.0 * f(lo + 3 * h));
    };
    const double mid = 0.5 * (a + b);
    const double whole = open_rule(a, b);
    const double halves = open_rule(a, mid) + open_rule(mid, b);
    if (std::abs(whole - halves) < tol || depth > 60)
        return halves;
    return simpson_oracle(f, a, mid, 0.5 * tol, depth + 1) +
           simpson_oracle(f, mid, b, 0.5 * tol, depth + 1);
}

} // namespace

TEST_CASE("integrate: polynomial exactness") {
    auto r = integrate([](double x) { return Complex(x, 0.0); }, {0.0, 1.0});
    CHECK(std::abs(r.value - 0.5) < 1e-12);
    CHECK(r.error >= 0.0);
}

TEST_CASE("integrate: declared inverse square root singularity") {
    QuadratureSpec spec{0.0, 1.0, -0.5, 0.0, 1e-13};
    auto r = integrate([](double x) { return Complex(1.0 / std::sqrt(x), 0.0); }, spec);
    CHECK(std::abs(r.value - 2.0) < 1e-10);
}

TEST_CASE("integrate: both endpoints singular") {
    QuadratureSpec spec{0.0, 1.0, -0.5, -0.5, 1e-13};
    auto r = integrate([](double x) { return Complex(1.0 / std::sqrt(x * (1.0 - x)), 0.0); }, spec);
    CHECK(std::abs(r.value - pi) < 1e-10);
}

TEST_CASE("integrate: logarithmic endpoint handled by bisection") {
    QuadratureSpec spec{0.0, 1.0, 0.0, 0.0, 1e-11};
    auto r = integrate([](double x) { return Complex(std::log(x), 0.0); }, spec);
    const double oracle = simpson_oracle([](double x) { return std::log(x); }, 0.0, 1.0, 1e-10);
    CHECK(std::abs(oracle + 1.0) < 1e-7);
    CHECK(std::abs(r.value - oracle) < 1e-7);
    CHECK(std::abs(r.value + 1.0) < 1e-8);
}

TEST_CASE("integrate: complex integrand and linearity") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    auto f = [](double x) { return std::exp(Complex(0.0, 3.0 * x)) / std::sqrt(x); };
    auto g = [](double x) { return Complex(std::cos(x), x * x) / std::sqrt(x); };
    QuadratureSpec spec{0.0, 2.0, -0.5, 0.0, 1e-12};
    const Complex If = integrate(f, spec).value;
    const Complex Ig = integrate(g, spec).value;
    for (int trial = 0; trial < 5; ++trial) {
        const double a = coef(rng);
        const double b = coef(rng);
        const Complex Ih = integrate([&](double x) { return a * f(x) + b * g(x); }, spec).value;
        CHECK(std::abs(Ih - (a * If + b * Ig)) <= 10.0 * spec.tolerance * std::abs(Ih) + 1e-14);
    }
}

TEST_CASE("integrate: rejects bad specs and reports panel exhaustion") {
    CHECK_THROWS_AS(integrate([](double) { return Complex(1.0); }, {0.0, 1.0, -1.0, 0.0}),
                    DomainError);
    CHECK_THROWS_AS(integrate([](double) { return Complex(1.0); }, {1.0, 0.0}), DomainError);
    QuadratureSpec tight{0.0, 1.0, 0.0, 0.0, 1e-14, 4};
    CHECK_THROWS_AS(integrate([](double x) { return Complex(std::sin(200.0 * x)); }, tight),
                    ConvergenceError);
}

TEST_CASE("gauss_jacobi: integrates weighted monomials exactly") {
    // int_{-1}^{1} (1+x)^beta x dx for alpha = 0:
    // substitute u = 1+x: int_0^2 u^beta (u-1) du = 2^{beta+2}/(beta+2) - 2^{beta+1}/(beta+1)
    const double beta = -0.3;
    const GaussRule rule = gauss_jacobi(6, 0.0, beta);
    double s0 = 0.0;
    double s1 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        s0 += rule.weights[i];
        s1 += rule.weights[i] * rule.nodes[i];
    }
    CHECK(s0 == doctest::Approx(std::pow(2.0, beta + 1) / (beta + 1)).epsilon(1e-13));
    CHECK(s1 == doctest::Approx(std::pow(2.0, beta + 2) / (beta + 2) -
                                std::pow(2.0, beta + 1) / (beta + 1))
                    .epsilon(1e-12));
}

TEST_CASE("solve_system: scalar and linear examples") {
    auto r1 = solve_system([](const RealVector& x) { return RealVector::Constant(1, x[0] * x[0] - 4.0); },
                           RealVector::Constant(1, 1.0));
    CHECK(r1.root[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r1.residual_norm <= 1e-12);

    auto r2 = solve_system(
        [](const RealVector& x) {
            RealVector r(2);
            r << x[0] + x[1] - 1.0, x[0] - x[1];
            return r;
        },
        RealVector::Zero(2));
    CHECK(r2.root[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r2.root[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("solve_system: empty parameter vector") {
    auto r = solve_system([](const RealVector&) { return RealVector(); }, RealVector());
    CHECK(r.root.size() == 0);
    CHECK(r.residual_norm == 0.0);
    CHECK_THROWS_AS(
        solve_system([](const RealVector&) { return RealVector::Constant(1, 1.0); }, RealVector()),
        SolveFailure);
}

TEST_CASE("solve_system: divergence reports best iterate") {
    try {
        solve_system([](const RealVector& x) { return RealVector::Constant(1, x[0] * x[0] + 1.0); },
                     RealVector::Constant(1, 0.5));
        FAIL("expected failure");
    } catch (const SolveFailure& e) {
        CHECK(e.best_iterate().size() == 1);
        CHECK(e.residual() >= 1.0);
    }
}

TEST_CASE("ordered angles: monotone and invertible") {
    std::mt19937 rng(3);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> logits(4);
        for (double& u : logits)
            u = 2.0 * n01(rng);
        const auto angles = ordered_angles(0.3, 1.7, logits);
        double prev = 0.3;
        for (double a : angles) {
            CHECK(a > prev);
            prev = a;
        }
        CHECK(prev < 2.0);
        const auto back = ordered_logits(0.3, 1.7, angles);
        for (std::size_t k = 0; k < logits.size(); ++k)
            CHECK(back[k] == doctest::Approx(logits[k]).epsilon(1e-10));
    }
}

TEST_CASE("find_root brackets") {
    CHECK(find_root([](double x) { return std::cos(x); }, 0.0, 3.0) ==
          doctest::Approx(pi / 2).epsilon(1e-14));
    CHECK_THROWS_AS(find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0), DomainError);
}

TEST_CASE("integrate_ode: circular motion") {
    OdeOptions opt;
    opt.tolerance = 1e-12;
    auto sol = integrate_ode([](double, Complex z) { return Complex(0.0, 1.0) * z; }, 1.0, 0.0, pi, opt);
    CHECK(sol.termination == OdeTermination::reached_end);
    CHECK(std::abs(sol.back().z + 1.0) < 1e-8);
    for (std::size_t i = 1; i < sol.samples.size(); ++i)
        CHECK(sol.samples[i].s > sol.samples[i - 1].s);
}

TEST_CASE("integrate_ode: zero field keeps the start point") {
    const Complex z0(0.2, -0.4);
    auto sol = integrate_ode([](double, Complex) { return Complex(0.0); }, z0, 0.0, 3.0);
    for (const auto& s : sol.samples)
        CHECK(s.z == z0);
}

TEST_CASE("integrate_ode: singular field is truncated and flagged") {
    // z' = 1/(2 sqrt(-s)) on [-1, 0]: the field blows up at s = 0.
    auto field = [](double s, Complex) {
        if (s >= 0.0)
            throw DomainError("singular");
        return Complex(0.5 / std::sqrt(-s), 0.0);
    };
    OdeOptions with_stop;
    with_stop.stop = [](double s, Complex) { return s > -1e-6; };
    auto stopped = integrate_ode(field, -1.0, -1.0, 0.0, with_stop);
    CHECK(stopped.termination == OdeTermination::stopped_by_predicate);
    CHECK(stopped.truncated());
    // exact solution z(s) = -sqrt(-s)
    CHECK(std::abs(stopped.back().z + std::sqrt(-stopped.back().s)) < 1e-6);

    auto unguarded = integrate_ode(field, -1.0, -1.0, 0.0);
    CHECK(unguarded.truncated());
}

TEST_CASE("integrate_ode: terminal event is located") {
    OdeOptions opt;
    opt.tolerance = 1e-13;
    opt.event = [](double, Complex z) { return z.real() - 0.5; };
    auto sol = integrate_ode([](double, Complex) { return Complex(1.0, 0.0); }, 0.0, 0.0, 10.0, opt);
    CHECK(sol.termination == OdeTermination::event_located);
    CHECK(sol.back().s == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("integrate_ode: split spans agree") {
    OdeOptions opt;
    opt.tolerance = 1e-11;
    auto field = [](double s, Complex z) { return Complex(std::cos(s), 0.3) * z + Complex(0.1, 0.0); };
    const Complex z0(0.3, 0.2);
    auto whole = integrate_ode(field, z0, 0.0, 2.0, opt);
    auto first = integrate_ode(field, z0, 0.0, 1.0, opt);
    auto second = integrate_ode(field, first.back().z, 1.0, 2.0, opt);
    CHECK(std::abs(whole.back().z - second.back().z) <= 10.0 * opt.tolerance * (1.0 + std::abs(whole.back().z)));
}

TEST_CASE("extrapolate_limit: polynomial data") {
    std::vector<ExtrapolationSample> lin{{0.1, 1.1}, {0.05, 1.05}, {0.025, 1.025}};
    auto r = extrapolate_limit(lin);
    CHECK(std::abs(r.limit - 1.0) < 1e-10);
    CHECK(r.monotone);

    std::vector<ExtrapolationSample> quad;
    for (double h : {0.1, 0.05, 0.025})
        quad.push_back({h, 2.0 + 3.0 * h * h});
    auto q = extrapolate_limit(quad);
    CHECK(std::abs(q.limit - 2.0) < 1e-14);
}

TEST_CASE("extrapolate_limit: exponential data") {
    std::vector<ExtrapolationSample> s;
    for (int j = 0; j < 8; ++j) {
        const double h = 0.1 * std::pow(0.5, j);
        s.push_back({h, std::exp(h)});
    }
    auto r = extrapolate_limit(s);
    CHECK(std::abs(r.limit - 1.0) < 1e-8);
    CHECK(r.error < 1e-6);
}

TEST_CASE("extrapolate_limit: non-monotone data is flagged") {
    std::vector<ExtrapolationSample> s{{0.1, 1.0}, {0.05, 1.2}, {0.025, 0.7}, {0.0125, 1.4}};
    auto r = extrapolate_limit(s);
    CHECK_FALSE(r.monotone);
    CHECK(r.limit == Complex(1.4));
    CHECK_THROWS_AS(extrapolate_limit(std::span(s).first(2)), DomainError);
}
