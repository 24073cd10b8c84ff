#include <doctest.h>

#include <cmath>
#include <random>

#include "angulus/moduli.hpp"
#include "support/laplace_fe.hpp"

using namespace angulus;
using namespace angulus::moduli;
using numerics::pi;
using C = std::complex<double>;

namespace {

const double m0 = 2.0 / pi * std::log(2.0);

// m(D_k) from the prevertices: the log-sum expansion of h at both ends.
double star_modulus_oracle(const koenigs::KoenigsMap& map, std::size_t k) {
    const auto& al = map.domain().alphas();
    std::vector<std::pair<C, double>> pts{{map.denjoy_wolff().value(), -1.0 / pi}};
    for (std::size_t j = 0; j < al.size(); ++j) pts.push_back({map.repulsive()[j].value(), al[j] / pi});
    auto rest = [&](std::size_t skip) {
        double s = 0.0;
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (j != skip) s += pts[j].second * std::log(std::abs(1.0 - pts[skip].first / pts[j].first));
        return s;
    };
    return (rest(0) - rest(k + 1)) / al[k];
}

geometry::MobiusMap to_standard(C z1, C z2, C z3) {
    // z -> (z - z1)(z2 - z3) / ((z - z3)(z2 - z1)), sending z1, z2, z3 to 0, 1, inf
    return {z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1)};
}

geometry::MobiusMap three_point(C z1, C z2, C z3, C w1, C w2, C w3) {
    return to_standard(w1, w2, w3).inverse().compose(to_standard(z1, z2, z3));
}

std::shared_ptr<const koenigs::KoenigsMap> make_map(std::vector<double> a, std::vector<double> g) {
    return std::make_shared<const koenigs::KoenigsMap>(koenigs::build_koenigs_map(koenigs::SlitStripDomain(a, g)));
}

} // namespace

TEST_CASE("unit disk digon") {
    auto d = Digon::unit_disk();
    CHECK(std::abs(d.chart(C(0.0, 0.5))) < 1e-15);
    CHECK(std::abs(d.inverse(d.chart(C(0.7, 0.3)))->imag() - 0.3) < 1e-13);
    auto r = reduced_modulus(d);
    CHECK(r.value == doctest::Approx(m0).epsilon(1e-9));
    CHECK(r.error < 1e-8);
    CHECK(vertex_angle(d, true).value == doctest::Approx(pi).epsilon(1e-8));
    CHECK(vertex_angle(d, false).value == doctest::Approx(pi).epsilon(1e-8));
    CHECK(d.contains(C(0.0, 0.0)));
    CHECK_FALSE(d.contains(C(1.0, 0.0)));
}

TEST_CASE("substrip of half width") {
    // lower half disk = image of {0 < Im < 1/2} under the disk chart
    auto full = Digon::unit_disk();
    Digon half([full](C w) { return full.chart(0.5 * w); },
               [full](C z) -> std::optional<C> {
                   auto w = full.inverse(z);
                   if (!w) return std::nullopt;
                   return 2.0 * *w;
               },
               full.a(), full.b(), pi / 2, pi / 2);
    CHECK(half.contains(C(0.0, -0.5)));
    CHECK_FALSE(half.contains(C(0.0, 0.5)));
    CHECK(vertex_angle(half, true).value == doctest::Approx(pi / 2).epsilon(1e-8));
    CHECK(reduced_modulus(half).value == doctest::Approx(2.0 * m0).epsilon(1e-9));
}

TEST_CASE("finite element oracle") {
    auto d = Digon::unit_disk();
    for (double eps : {0.05, 0.02}) {
        auto fe = test_support::disk_digon_modulus(eps, 96);
        double m_fe = fe.modulus + 2.0 / pi * std::log(eps);
        double m_chart = regularized_modulus(d, eps);
        CHECK(std::abs(m_fe - m_chart) < 1e-2);
    }
}

TEST_CASE("moebius covariance") {
    auto d = Digon::unit_disk();
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> ang(0.0, 2 * pi), rad(0.0, 0.6);
    for (int i = 0; i < 20; ++i) {
        auto t = geometry::MobiusMap::disk_automorphism(ang(rng), std::polar(rad(rng), ang(rng)));
        auto td = d.transformed(t);
        double expected = change_of_variable(m0, pi, pi, std::abs(t.derivative(-1.0)), std::abs(t.derivative(1.0)));
        CHECK(std::abs(reduced_modulus(td).value - expected) < 1e-6);
    }
    CHECK_THROWS_AS(change_of_variable(m0, pi, pi, 0.0, 1.0), DomainError);
}

TEST_CASE("extremal star system") {
    auto n1 = make_map({1.0}, {});
    std::vector<double> w1{1.0};
    auto s1 = extremal_star_system(n1, w1);
    compute_moduli(s1);
    CHECK(s1.moduli[0]->value == doctest::Approx(m0).epsilon(1e-8));
    CHECK(weighted_modulus_sum(s1) == doctest::Approx(m0).epsilon(1e-8));

    for (auto [al, ga] : {std::pair<std::vector<double>, std::vector<double>>{{0.4, 0.6}, {-1.0}},
                          {{0.2, 0.3, 0.5}, {-1.0, -0.5}}}) {
        auto map = make_map(al, ga);
        auto sys = extremal_star_system(map, al);
        compute_moduli(sys);
        double sum = 0.0;
        for (std::size_t k = 0; k < al.size(); ++k) {
            CHECK(std::abs(sys.moduli[k]->value - star_modulus_oracle(*map, k)) < 1e-7);
            sum += al[k] * al[k] * star_modulus_oracle(*map, k);
            CHECK(sys.compatible_angle_at_center(k) == doctest::Approx(pi * al[k]));
            CHECK(sys.compatible_angle_at_endpoint(k) == doctest::Approx(pi));
            CHECK(std::abs(vertex_angle(sys.digons[k], true).value - pi * al[k]) < 1e-6);
            CHECK(std::abs(vertex_angle(sys.digons[k], false).value - pi) < 1e-6);
        }
        CHECK(std::abs(weighted_modulus_sum(sys) - sum) < 1e-7);
        CHECK(sampled_overlaps(sys) == 0);
    }

    auto map = make_map({0.4, 0.6}, {-1.0});
    std::vector<double> wrong{0.5, 0.5};
    CHECK_THROWS_WITH_AS(extremal_star_system(map, wrong), "weights must match channel widths", DomainError);
    auto sys = extremal_star_system(map, std::vector<double>{0.4, 0.6});
    CHECK_THROWS_AS(weighted_modulus_sum(sys), DomainError);
}

TEST_CASE("end-to-end identity") {
    std::vector<double> al{0.4, 0.6};
    auto map = make_map(al, {-1.0});
    const double t = 0.5;
    auto before = extremal_star_system(map, al);
    auto after = extremal_star_system(map, al, t);
    compute_moduli(before);
    compute_moduli(after);
    auto lm = koenigs::exact_log_multipliers(map->domain(), t);
    double rhs = lm.denjoy_wolff;
    for (std::size_t k = 0; k < al.size(); ++k) rhs += al[k] * al[k] * lm.repulsive[k];
    rhs /= pi;
    double lhs = weighted_modulus_sum(after) - weighted_modulus_sum(before);
    CHECK(std::abs(lhs - rhs) < 1e-3);
    CHECK(std::abs(lhs - rhs) < 1e-7);

    // the same images through the generic push-forward
    auto f = [map, t](C z) { return map->inverse(map->eval(z) + t); };
    auto finv = [map, t](C z) -> std::optional<C> {
        try {
            return map->inverse(map->eval(z) - t);
        } catch (const DomainError&) {
            return std::nullopt;
        }
    };
    auto pushed = image_system(before, f, finv);
    compute_moduli(pushed);
    CHECK(std::abs(weighted_modulus_sum(pushed) - weighted_modulus_sum(after)) < 1e-6);
}

TEST_CASE("extremality against conjugated semigroups") {
    std::vector<double> al{0.4, 0.6};
    auto map = make_map(al, {-1.0});
    auto base = extremal_star_system(map, al);
    compute_moduli(base);
    const double base_sum = weighted_modulus_sum(base);

    for (auto [other_al, other_ga] : {std::pair<std::vector<double>, std::vector<double>>{{0.7, 0.3}, {-0.5}},
                                      {{0.5, 0.5}, {-2.0}}}) {
        auto other = make_map(other_al, other_ga);
        auto tm = three_point(other->denjoy_wolff().value(), other->repulsive()[0].value(),
                              other->repulsive()[1].value(), map->denjoy_wolff().value(),
                              map->repulsive()[0].value(), map->repulsive()[1].value());
        REQUIRE(tm.is_disk_automorphism());
        auto ti = tm.inverse();
        const double t = 0.4;
        auto psi = [=](C z) { return *tm.apply(other->inverse(other->eval(*ti.apply(z)) + t)); };
        auto psi_inv = [=](C z) -> std::optional<C> {
            try {
                return *tm.apply(other->inverse(other->eval(*ti.apply(z)) - t));
            } catch (const DomainError&) {
                return std::nullopt;
            }
        };
        auto img = image_system(base, psi, psi_inv);
        compute_moduli(img);
        double predicted = -1.0;
        for (std::size_t k = 0; k < 2; ++k) predicted += al[k] * al[k] / other_al[k];
        predicted *= t;
        double diff = weighted_modulus_sum(img) - base_sum;
        CHECK(diff >= -1e-6);
        CHECK(std::abs(diff - predicted) < 1e-5);
    }
}
