#include "angulus/moduli.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace angulus::moduli {

using numerics::pi;

Digon::Digon(Chart chart, InverseChart inverse, BoundaryPoint a, BoundaryPoint b, double delta_a, double delta_b)
    : chart_(std::move(chart)), inverse_(std::move(inverse)), a_(a), b_(b), delta_a_(delta_a), delta_b_(delta_b) {
    if (!(delta_a > 0.0 && delta_a <= pi && delta_b > 0.0 && delta_b <= pi))
        throw DomainError("digon angles must lie in (0, pi]");
    if (std::abs(a.value() - b.value()) < 1e-14) throw DomainError("digon vertices coincide");
}

Digon Digon::unit_disk() {
    auto chart = [](Complex w) { return std::tanh(0.5 * pi * (w - Complex(0.0, 0.5))); };
    auto inverse = [](Complex z) -> std::optional<Complex> {
        if (std::abs(z) >= 1.0) return std::nullopt;
        return std::log((1.0 + z) / (1.0 - z)) / pi + Complex(0.0, 0.5);
    };
    return Digon(chart, inverse, BoundaryPoint(pi), BoundaryPoint(0.0), pi, pi);
}

Digon Digon::transformed(const geometry::MobiusMap& t) const {
    if (!t.is_disk_automorphism()) throw DomainError("not a disk automorphism");
    auto ta = t.apply(a_.value());
    auto tb = t.apply(b_.value());
    if (!ta || !tb) throw DomainError("automorphism pole on a vertex");
    auto inv = t.inverse();
    Chart c = chart_;
    InverseChart ic = inverse_;
    return Digon([t, c](Complex w) { return *t.apply(c(w)); },
                 [inv, ic](Complex z) -> std::optional<Complex> {
                     auto p = inv.apply(z);
                     if (!p) return std::nullopt;
                     return ic(*p);
                 },
                 BoundaryPoint::from_complex(*ta), BoundaryPoint::from_complex(*tb), delta_a_, delta_b_);
}

Digon Digon::mapped(Chart f, InverseChart f_inverse) const {
    Chart c = chart_;
    InverseChart ic = inverse_;
    return Digon([f, c](Complex w) { return f(c(w)); },
                 [f_inverse, ic](Complex z) -> std::optional<Complex> {
                     auto p = f_inverse(z);
                     if (!p) return std::nullopt;
                     return ic(*p);
                 },
                 a_, b_, delta_a_, delta_b_);
}

bool Digon::contains(Complex z) const {
    if (std::abs(z) >= 1.0) return false;
    auto w = inverse_(z);
    return w && w->imag() > 0.0 && w->imag() < 1.0;
}

namespace {

// The part of the truncation arc |z - v| = eps that lies in D.
struct ArcSection {
    const Digon* d;
    Complex v;
    double eps;
    double lo = 0.0;
    double hi = 0.0;

    Complex point(double psi) const { return v * (1.0 - eps * std::polar(1.0, psi)); }
    std::optional<Complex> chart_inverse(double psi) const { return d->inverse(point(psi)); }
    bool inside(double psi) const {
        auto w = chart_inverse(psi);
        return w && w->imag() > 0.0 && w->imag() < 1.0;
    }
};

ArcSection locate_section(const Digon& d, const BoundaryPoint& v, double eps) {
    ArcSection sec{&d, v.value(), eps};
    const double psi_max = std::acos(0.5 * eps);
    const int n = 512;
    std::vector<double> grid(n);
    std::vector<char> in(n);
    for (int i = 0; i < n; ++i) {
        grid[i] = -psi_max + 2.0 * psi_max * (i + 0.5) / n;
        in[i] = sec.inside(grid[i]);
    }
    int best_start = -1, best_len = 0;
    for (int i = 0; i < n;) {
        if (!in[i]) {
            ++i;
            continue;
        }
        int j = i;
        while (j < n && in[j]) ++j;
        if (j - i > best_len) {
            best_len = j - i;
            best_start = i;
        }
        i = j;
    }
    if (best_len == 0) throw DomainError("truncation arc misses the digon");

    auto refine = [&](double inside_psi, double outside_psi) {
        for (int it = 0; it < 64; ++it) {
            double mid = 0.5 * (inside_psi + outside_psi);
            if (mid == inside_psi || mid == outside_psi) break;
            (sec.inside(mid) ? inside_psi : outside_psi) = mid;
        }
        return inside_psi;
    };
    int first = best_start, last = best_start + best_len - 1;
    sec.lo = first > 0 ? refine(grid[first], grid[first - 1]) : refine(grid[first], -psi_max);
    sec.hi = last < n - 1 ? refine(grid[last], grid[last + 1]) : refine(grid[last], psi_max);
    return sec;
}

// Re chart^{-1} on the arc at height y.
double abscissa_at(const ArcSection& sec, double y) {
    auto f = [&](double psi) { return sec.chart_inverse(psi)->imag() - y; };
    double psi = numerics::find_root(f, sec.lo, sec.hi, 1e-15);
    return sec.chart_inverse(psi)->real();
}

const numerics::GaussRule& legendre(int n) {
    thread_local std::map<int, numerics::GaussRule> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, numerics::gauss_jacobi(n, 0.0, 0.0)).first;
    return it->second;
}

std::vector<double> eps_schedule(const ModulusOptions& o) {
    if (o.levels < 3 || !(o.first_eps > 0.0 && o.first_eps < 1.0) || !(o.ratio > 0.0 && o.ratio < 1.0))
        throw DomainError("invalid modulus options");
    std::vector<double> e(o.levels);
    for (int j = 0; j < o.levels; ++j) e[j] = o.first_eps * std::pow(o.ratio, j);
    return e;
}

} // namespace

double truncated_modulus(const Digon& d, double eps, int nodes) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
    ArcSection left = locate_section(d, d.a(), eps);
    ArcSection right = locate_section(d, d.b(), eps);
    const auto& rule = legendre(nodes);
    double m = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double y = 0.5 * (rule.nodes[i] + 1.0);
        m += 0.5 * rule.weights[i] * (abscissa_at(right, y) - abscissa_at(left, y));
    }
    return m;
}

double regularized_modulus(const Digon& d, double eps, int nodes) {
    return truncated_modulus(d, eps, nodes) + (1.0 / d.delta_a() + 1.0 / d.delta_b()) * std::log(eps);
}

namespace {

struct AdaptiveLimit {
    bool found = false;
    double value = 0.0;
    double error = 0.0;
    std::vector<numerics::ExtrapolationSample> samples;
};

// Extrapolates f(eps) to 0 over sliding windows of the eps schedule.
AdaptiveLimit adaptive_limit(const std::function<double(double)>& f, const ModulusOptions& options) {
    std::vector<numerics::ExtrapolationSample> all;
    for (double e : eps_schedule(options)) all.push_back({e, f(e)});
    AdaptiveLimit best;
    for (;;) {
        std::span<const numerics::ExtrapolationSample> window(all.data() + all.size() - options.levels, options.levels);
        auto lim = numerics::extrapolate_limit(window);
        if (!best.found) best.value = lim.limit.real(), best.error = lim.error;
        if (lim.monotone && (!best.found || lim.error < best.error)) {
            best.found = true;
            best.value = lim.limit.real();
            best.error = lim.error;
            best.samples.assign(window.begin(), window.end());
        }
        if (best.found && best.error <= 0.1 * options.tolerance) break;
        double next = all.back().h * options.ratio;
        if (next < options.min_eps) break;
        all.push_back({next, f(next)});
    }
    return best;
}

} // namespace

ReducedModulus reduced_modulus(const Digon& d, const ModulusOptions& options) {
    auto lim = adaptive_limit([&](double e) { return regularized_modulus(d, e, options.nodes); }, options);
    if (!lim.found || !(lim.error <= options.tolerance))
        throw ConvergenceError("reduced modulus does not stabilize", lim.value, lim.error);
    return {lim.value, lim.error, std::move(lim.samples)};
}

AngleEstimate vertex_angle(const Digon& d, bool at_a, const ModulusOptions& options) {
    auto lim = adaptive_limit(
        [&](double e) {
            auto sec = locate_section(d, at_a ? d.a() : d.b(), e);
            return sec.hi - sec.lo;
        },
        options);
    return {lim.value, lim.error};
}

double change_of_variable(double m, double delta_a, double delta_b, double da, double db) {
    if (!(da > 0.0) || !(db > 0.0)) throw DomainError("angular derivatives must be positive");
    if (!(delta_a > 0.0) || !(delta_b > 0.0)) throw DomainError("digon angles must be positive");
    return m + std::log(da) / delta_a + std::log(db) / delta_b;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> DigonSystem::at_center() const {
    std::vector<std::size_t> idx(digons.size());
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

double DigonSystem::compatible_angle_at_center(std::size_t k) const {
    double total = 0.0;
    for (auto j : at_center()) total += heights.at(j);
    return pi * heights.at(k) / total;
}

double DigonSystem::compatible_angle_at_endpoint(std::size_t k) const {
    (void)heights.at(k);
    return pi;
}

DigonSystem extremal_star_system(std::shared_ptr<const koenigs::KoenigsMap> map, std::span<const double> alphas,
                                 double t) {
    if (!map) throw DomainError("null map");
    const auto& dom = map->domain();
    if (alphas.size() != dom.channels()) throw DomainError("weights must match channel widths");
    for (std::size_t k = 0; k < alphas.size(); ++k)
        if (std::abs(alphas[k] - dom.alphas()[k]) > 1e-12) throw DomainError("weights must match channel widths");
    if (!(t >= 0.0)) throw DomainError("t must be non-negative");

    DigonSystem sys;
    sys.center = map->denjoy_wolff();
    sys.endpoints = map->repulsive();
    sys.heights.assign(alphas.begin(), alphas.end());
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        const double al = alphas[k];
        const Complex top(t, dom.level(k + 1));
        auto chart = [map, al, top](Complex w) { return map->inverse(-al * w + top); };
        auto inverse = [map, al, top](Complex z) -> std::optional<Complex> {
            try {
                return (top - map->eval(z)) / al;
            } catch (const DomainError&) {
                return std::nullopt;
            }
        };
        sys.digons.emplace_back(chart, inverse, sys.center, sys.endpoints[k], pi * al, pi);
    }
    sys.moduli.resize(sys.digons.size());
    return sys;
}

void compute_moduli(DigonSystem& system, const ModulusOptions& options) {
    system.moduli.resize(system.digons.size());
    for (std::size_t k = 0; k < system.digons.size(); ++k) system.moduli[k] = reduced_modulus(system.digons[k], options);
}

double weighted_modulus_sum(const DigonSystem& system) {
    if (system.moduli.size() != system.digons.size()) throw DomainError("moduli not computed");
    double s = 0.0;
    for (std::size_t k = 0; k < system.digons.size(); ++k) {
        if (!system.moduli[k]) throw DomainError("moduli not computed");
        s += system.heights[k] * system.heights[k] * system.moduli[k]->value;
    }
    return s;
}

int sampled_overlaps(const DigonSystem& system, int samples_per_digon, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), uy(0.02, 0.98);
    int hits = 0;
    for (std::size_t k = 0; k < system.digons.size(); ++k) {
        for (int s = 0; s < samples_per_digon; ++s) {
            Complex z = system.digons[k].chart(Complex(ux(rng), uy(rng)));
            for (std::size_t j = 0; j < system.digons.size(); ++j)
                if (j != k && system.digons[j].contains(z)) ++hits;
        }
    }
    return hits;
}

DigonSystem image_system(const DigonSystem& system, const Digon::Chart& f, const Digon::InverseChart& f_inverse) {
    DigonSystem out;
    out.center = system.center;
    out.endpoints = system.endpoints;
    out.heights = system.heights;
    for (const auto& d : system.digons) out.digons.push_back(d.mapped(f, f_inverse));
    out.moduli.resize(out.digons.size());
    return out;
}

} // namespace angulus::moduli
