#include "angulus/koenigs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "angulus/numerics.hpp"

namespace angulus::koenigs {

using numerics::pi;

namespace {

constexpr double two_pi = 2.0 * pi;

double wrap(double x) {
    double r = std::fmod(x, two_pi);
    return r < 0.0 ? r + two_pi : r;
}

// Boundary values of sum_p c_p Log(1 - z/p) at z = e^{i theta}, with angles
// measured from an arbitrary origin.
struct BoundaryTrace {
    std::vector<double> theta;
    std::vector<double> c;

    double re(double t) const {
        double s = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i)
            s += c[i] * std::log(2.0 * std::abs(std::sin((t - theta[i]) / 2.0)));
        return s;
    }
    double dre(double t) const {
        double s = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i)
            s += c[i] * 0.5 / std::tan((t - theta[i]) / 2.0);
        return s;
    }
    double im(double t) const {
        double s = 0.0;
        for (std::size_t i = 0; i < theta.size(); ++i)
            s += c[i] * wrap(t - theta[i]) / 2.0;
        return s;
    }
    // Critical point of Re h on the open arc (lo, hi), lo < hi.
    double tip(double lo, double hi) const {
        const double gap = hi - lo;
        double d = 1e-9 * gap;
        while (dre(lo + d) <= 0.0 || dre(hi - d) >= 0.0) {
            d *= 1e-2;
            if (d < 1e-300)
                throw DomainError("slit tip prevertex could not be bracketed");
        }
        return numerics::find_root([this](double t) { return dre(t); }, lo + d, hi - d, 1e-16);
    }
};

std::vector<double> channel_coefficients(const SlitStripDomain& d) {
    std::vector<double> c{-1.0 / pi};
    for (double a : d.alphas())
        c.push_back(a / pi);
    return c;
}

// Angles measured from a (a at 0): xi_n ... xi_1 increasing counterclockwise.
BoundaryTrace relative_trace(const std::vector<BoundaryPoint>& pts, const std::vector<double>& c) {
    BoundaryTrace tr;
    tr.c = c;
    for (const auto& p : pts)
        tr.theta.push_back(geometry::ccw_distance(pts.front(), p));
    return tr;
}

// Tips w_k between xi_{k+1} and xi_k, relative angles.
std::vector<double> relative_tips(const BoundaryTrace& tr) {
    const std::size_t n = tr.theta.size() - 1;
    std::vector<double> out;
    for (std::size_t k = 1; k < n; ++k)
        out.push_back(tr.tip(tr.theta[k + 1], tr.theta[k]));
    return out;
}

} // namespace

// ---------------------------------------------------------------------------

SlitStripDomain::SlitStripDomain(std::vector<double> alphas, std::vector<double> gammas)
    : alphas_(std::move(alphas)), gammas_(std::move(gammas)) {
    if (alphas_.empty())
        throw DomainError("SlitStripDomain: at least one channel is required");
    if (gammas_.size() + 1 != alphas_.size())
        throw DomainError("SlitStripDomain: need exactly one slit abscissa per pair of adjacent channels");
    double sum = 0.0;
    for (double a : alphas_) {
        if (!(a > 0.0))
            throw DomainError("SlitStripDomain: channel widths must be positive");
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw DomainError("SlitStripDomain: channel widths must sum to one");
    for (double g : gammas_)
        if (!(g < 0.0) || !std::isfinite(g))
            throw DomainError("SlitStripDomain: slit abscissas must be negative");
    levels_.push_back(-0.5);
    for (std::size_t k = 0; k + 1 < alphas_.size(); ++k)
        levels_.push_back(levels_.back() + alphas_[k]);
    levels_.push_back(0.5);
}

bool SlitStripDomain::contains(Complex w) const {
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
        return false;
    if (!(std::abs(w.imag()) < 0.5))
        return false;
    for (std::size_t k = 0; k < gammas_.size(); ++k)
        if (w.imag() == levels_[k + 1] && w.real() <= gammas_[k])
            return false;
    return true;
}

bool SlitStripDomain::conjugation_symmetric(double tol) const {
    const std::size_t n = alphas_.size();
    for (std::size_t k = 0; k < n; ++k)
        if (std::abs(alphas_[k] - alphas_[n - 1 - k]) > tol)
            return false;
    for (std::size_t k = 0; k < gammas_.size(); ++k)
        if (std::abs(gammas_[k] - gammas_[gammas_.size() - 1 - k]) > tol)
            return false;
    return true;
}

double InvariantSetReport::total_width() const {
    double s = 0.0;
    for (const auto& st : strips)
        s += st.width;
    return s;
}

InvariantSetReport invariant_set(const SlitStripDomain& domain) {
    InvariantSetReport rep;
    for (std::size_t k = 0; k < domain.channels(); ++k)
        rep.strips.push_back({domain.level(k), domain.level(k + 1), domain.alphas()[k], k});
    return rep;
}

double KoenigsCertificate::residual() const { return std::max({level_residual, tip_residual, origin_residual}); }

// ---------------------------------------------------------------------------

KoenigsMap::KoenigsMap(SlitStripDomain domain, BoundaryPoint a, std::vector<BoundaryPoint> xi)
    : domain_(std::move(domain)), a_(a), xi_(std::move(xi)) {
    const auto c = channel_coefficients(domain_);
    channels_.push_back({a_.value(), c[0]});
    for (std::size_t k = 0; k < xi_.size(); ++k)
        channels_.push_back({xi_[k].value(), c[k + 1]});
    constant_ = 0.0;
    for (const auto& ch : channels_)
        constant_ += ch.c * ch.p;
}

Complex KoenigsMap::rest(Complex z, std::size_t skip) const {
    Complex s = 0.0;
    for (std::size_t i = 0; i < channels_.size(); ++i)
        if (i != skip)
            s += channels_[i].c * std::log(1.0 - z / channels_[i].p);
    return s;
}

Complex KoenigsMap::eval(Complex z) const {
    if (!(std::abs(z) < 1.0))
        throw DomainError("eval_h: point outside the open disk");
    for (const auto& ch : channels_)
        if (std::abs(z - ch.p) < 1e-14)
            throw DomainError("eval_h: boundary singularity");
    return rest(z, channels_.size());
}

Complex KoenigsMap::derivative(Complex z) const {
    Complex s = 0.0;
    for (const auto& ch : channels_)
        s += ch.c / (z - ch.p);
    return s;
}

Complex KoenigsMap::eval_by_quadrature(Complex z, double tolerance) const {
    if (!(std::abs(z) < 1.0))
        throw DomainError("eval_h: point outside the open disk");
    // h'(z) = C prod(z - w_j) / prod(z - p), integrated along the radius
    const auto f = [&](double s) {
        const Complex x = s * z;
        Complex num = constant_;
        for (const auto& w : tips_)
            num *= x - w.value();
        Complex den = 1.0;
        for (const auto& ch : channels_)
            den *= x - ch.p;
        return num / den * z;
    };
    numerics::QuadratureSpec spec;
    spec.tolerance = tolerance;
    return numerics::integrate(f, spec).value;
}

std::size_t KoenigsMap::nearest_channel(Complex z) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < channels_.size(); ++i)
        if (std::abs(z - channels_[i].p) < std::abs(z - channels_[best].p))
            best = i;
    return best;
}

bool KoenigsMap::solve_local(Complex w, std::size_t index, Complex& s) const {
    const Complex p = channels_[index].p;
    const double c = channels_[index].c;
    const auto inside = [](Complex s) {
        return std::abs(s.imag()) < pi / 2 && s.real() < std::log(2.0 * std::cos(s.imag()));
    };
    const auto residual = [&](Complex s) { return c * s + rest(p * (1.0 - std::exp(s)), index) - w; };
    if (!inside(s))
        return false;
    Complex f = residual(s);
    const double scale = std::max(1.0, std::abs(w));
    for (int it = 0; it < 100; ++it) {
        if (std::abs(f) <= 1e-14 * scale)
            return true;
        const Complex e = std::exp(s);
        const Complex z = p * (1.0 - e);
        Complex drest = 0.0;
        for (std::size_t i = 0; i < channels_.size(); ++i)
            if (i != index)
                drest += channels_[i].c / (z - channels_[i].p);
        const Complex df = c - drest * p * e;
        if (df == 0.0)
            return false;
        const Complex step = -f / df;
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 50; ++k, lambda *= 0.5) {
            const Complex trial = s + lambda * step;
            if (!inside(trial))
                continue;
            const Complex ft = residual(trial);
            if (std::isfinite(std::abs(ft)) && std::abs(ft) < std::abs(f)) {
                s = trial;
                f = ft;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            break;
        if (std::abs(lambda * step) <= 1e-16 * std::max(1.0, std::abs(s)))
            break;
    }
    return std::abs(f) <= 1e-11 * scale;
}

void KoenigsMap::tabulate_seeds() {
    constexpr int nr = 64;
    constexpr int na = 64;
    seed_points_.clear();
    seed_values_.clear();
    seed_points_.push_back(0.0);
    for (int i = 0; i < nr; ++i) {
        const double r = 1.0 - std::exp(-7.0 * (i + 1) / nr);
        for (int k = 0; k < na; ++k)
            seed_points_.push_back(std::polar(r, two_pi * (k + 0.5) / na));
    }
    // fans around every prevertex, for crowded configurations
    std::vector<Complex> pre;
    for (const auto& ch : channels_)
        pre.push_back(ch.p);
    for (const auto& w : tips_)
        pre.push_back(w.value());
    for (const Complex& q : pre)
        for (int j = 2; j <= 28; ++j)
            for (int k = -4; k <= 4; ++k)
                seed_points_.push_back(q * (1.0 - std::polar(std::pow(10.0, -0.5 * j), 0.35 * k)));
    for (const Complex& z : seed_points_)
        seed_values_.push_back(rest(z, channels_.size()));
}

Complex KoenigsMap::inverse(Complex w) const {
    const LocalPoint loc = inverse_local(w);
    return channels_[loc.channel].p * (1.0 - std::exp(loc.s));
}

Complex KoenigsMap::eval_local(const LocalPoint& pt) const {
    const auto& ch = channels_.at(pt.channel);
    return ch.c * pt.s + rest(ch.p * (1.0 - std::exp(pt.s)), pt.channel);
}

KoenigsMap::LocalPoint KoenigsMap::inverse_local(Complex w) const {
    if (!domain_.contains(w))
        throw DomainError("eval_h_inverse: point is not in the slit strip");
    struct Candidate {
        double miss;
        std::size_t channel;
        Complex s;
    };
    std::vector<Candidate> grid;
    for (std::size_t i = 0; i < seed_points_.size(); ++i)
        grid.push_back({std::abs(seed_values_[i] - w), 0, seed_points_[i]});
    const std::size_t tries = std::min<std::size_t>(12, grid.size());
    std::partial_sort(grid.begin(), grid.begin() + tries, grid.end(),
                      [](const Candidate& x, const Candidate& y) { return x.miss < y.miss; });
    std::vector<Candidate> cand;
    // channel asymptotics first: w ~ c Log(1 - z/p) + rest(p)
    for (std::size_t i = 0; i < channels_.size(); ++i) {
        const Complex s0 = (w - rest(channels_[i].p, i)) / channels_[i].c;
        if (s0.real() < std::log(0.25) && std::abs(s0.imag()) < pi / 2)
            cand.push_back({0.0, i, s0});
    }
    for (std::size_t j = 0; j < tries; ++j) {
        const Complex z = grid[j].s;
        const std::size_t idx = nearest_channel(z);
        cand.push_back({grid[j].miss, idx, std::log(1.0 - z / channels_[idx].p)});
    }
    for (auto& cd : cand)
        if (solve_local(w, cd.channel, cd.s))
            return {cd.channel, cd.s};
    throw ConvergenceError("eval_h_inverse: Newton failed from every seed", w.real(), 0.0);
}

Complex KoenigsMap::flow_offset(const BoundaryPoint& xi, Complex u, double t) const {
    std::size_t idx = channels_.size();
    for (std::size_t i = 0; i < channels_.size(); ++i)
        if (std::abs(channels_[i].p - xi.value()) < 1e-14)
            idx = i;
    if (idx == channels_.size()) {
        const Complex z = xi.value() * (1.0 - u);
        return inverse(eval(z) + t) - xi.value();
    }
    const Complex p = channels_[idx].p;
    const double c = channels_[idx].c;
    const Complex w = c * std::log(u) + rest(p * (1.0 - u), idx) + t;
    Complex s = (w - rest(p, idx)) / c;
    if (solve_local(w, idx, s))
        return -p * std::exp(s);
    const LocalPoint loc = inverse_local(w);
    if (loc.channel == idx)
        return -p * std::exp(loc.s);
    return channels_[loc.channel].p * (1.0 - std::exp(loc.s)) - p;
}

// ---------------------------------------------------------------------------

KoenigsMap build_koenigs_map(const SlitStripDomain& domain, const BuildOptions& options) {
    const std::size_t n = domain.channels();
    const auto c = channel_coefficients(domain);

    // Gauge: a at 0, xi_n at 2pi/3, xi_1 at 4pi/3 (for n = 1, xi_1 at pi).
    const auto angles_from = [&](const numerics::RealVector& x) {
        std::vector<double> th(n + 1, 0.0);
        if (n == 1) {
            th[1] = pi;
            return th;
        }
        th[n] = two_pi / 3;
        th[1] = 2 * two_pi / 3;
        std::vector<double> logits(x.data(), x.data() + x.size());
        const auto inner = numerics::ordered_angles(two_pi / 3, two_pi / 3, logits);
        for (std::size_t j = 0; j < inner.size(); ++j)
            th[n - 1 - j] = inner[j];
        return th;
    };
    const auto residual = [&](const numerics::RealVector& x) {
        if (n <= 2)
            return numerics::RealVector(0);
        BoundaryTrace tr{angles_from(x), c};
        const auto tips = relative_tips(tr);
        numerics::RealVector r(static_cast<Eigen::Index>(n > 2 ? n - 2 : 0));
        const double base = tr.re(tips[0]);
        for (std::size_t j = 1; j + 1 < n; ++j)
            r[static_cast<Eigen::Index>(j - 1)] =
                (tr.re(tips[j]) - base) - (domain.gammas()[j] - domain.gammas()[0]);
        return r;
    };
    numerics::SolveOptions so;
    so.tolerance = options.tolerance;
    so.max_iterations = 200;
    numerics::SolveResult sol;
    try {
        sol = numerics::solve_system(residual, numerics::RealVector::Zero(n > 2 ? n - 2 : 0), so);
    } catch (const DomainError& e) {
        throw ConvergenceError(std::string("build_koenigs_map: prevertices crowd below double resolution (") +
                                   e.what() + ")",
                               0.0, std::numeric_limits<double>::infinity());
    }
    const auto theta = angles_from(sol.root);

    // Translate the raw image onto Omega, then move the preimage of 0 to 0.
    BoundaryTrace tr{theta, c};
    const double bottom = tr.im((theta[1] + two_pi) / 2);
    double shift_re = 0.0;
    if (n > 1)
        shift_re = domain.gammas()[0] - tr.re(relative_tips(tr)[0]);
    const Complex shift(shift_re, -0.5 - bottom);

    std::vector<BoundaryPoint> raw_xi;
    for (std::size_t k = 1; k <= n; ++k)
        raw_xi.emplace_back(theta[k]);
    KoenigsMap raw(domain, BoundaryPoint(0.0), raw_xi);
    raw.tabulate_seeds();
    // h_raw(z*) = -shift
    Complex zstar = 0.0;
    if (std::abs(shift) > 1e-15) {
        const Complex target = -shift;
        Complex best = 0.0;
        double miss = 1e300;
        for (std::size_t i = 0; i < raw.seed_points_.size(); ++i) {
            const double m = std::abs(raw.seed_values_[i] - target);
            if (m < miss) {
                miss = m;
                best = raw.seed_points_[i];
            }
        }
        const std::size_t idx = raw.nearest_channel(best);
        Complex s = std::log(1.0 - best / raw.channels_[idx].p);
        if (!raw.solve_local(target, idx, s))
            throw ConvergenceError("build_koenigs_map: normalization point not found", std::abs(best), miss);
        zstar = raw.channels_[idx].p * (1.0 - std::exp(s));
    }
    const auto pull = [&](Complex p) { return (p - zstar) / (1.0 - std::conj(zstar) * p); };
    std::vector<Complex> moved{pull(1.0)};
    for (const auto& x : raw_xi)
        moved.push_back(pull(x.value()));
    Complex d = 0.0;
    for (std::size_t i = 0; i < moved.size(); ++i)
        d -= c[i] / moved[i];
    const Complex rot = std::polar(1.0, std::arg(d));

    std::vector<BoundaryPoint> xi;
    for (std::size_t k = 1; k <= n; ++k)
        xi.push_back(BoundaryPoint::from_complex(moved[k] * rot));
    KoenigsMap map(domain, BoundaryPoint::from_complex(moved[0] * rot), xi);

    // Certificate
    KoenigsCertificate& cert = map.cert_;
    cert.solver_iterations = sol.iterations;
    std::vector<BoundaryPoint> pts{map.a_};
    pts.insert(pts.end(), map.xi_.begin(), map.xi_.end());
    const BoundaryTrace fin = relative_trace(pts, c);
    for (std::size_t k = 1; k < n; ++k)
        if (!(fin.theta[k + 1] < fin.theta[k]))
            throw ConvergenceError("build_koenigs_map: prevertex order lost", fin.theta[k], 0.0);
    for (double rt : relative_tips(fin))
        map.tips_.emplace_back(map.a_.angle() + rt);
    map.tabulate_seeds();
    // arcs: a -> xi_n (top), xi_{k+1} -> xi_k (level y_k), xi_1 -> a (bottom)
    std::vector<double> ends{0.0};
    for (std::size_t k = n; k >= 1; --k)
        ends.push_back(fin.theta[k]);
    ends.push_back(two_pi);
    for (std::size_t j = 0; j + 1 < ends.size(); ++j) {
        const double expected = domain.level(n - j);
        cert.level_residual = std::max(cert.level_residual, std::abs(fin.im((ends[j] + ends[j + 1]) / 2) - expected));
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double rt = geometry::ccw_distance(map.a_, map.tips_[k]);
        cert.tip_residual = std::max(cert.tip_residual, std::abs(fin.re(rt) - domain.gammas()[k]));
    }
    cert.origin_residual = std::abs(map.eval(0.0));
    cert.derivative_argument = std::arg(map.derivative(0.0));

    std::vector<double> sorted(fin.theta.begin(), fin.theta.end());
    for (const auto& w : map.tips_)
        sorted.push_back(geometry::ccw_distance(map.a_, w));
    std::sort(sorted.begin(), sorted.end());
    sorted.push_back(two_pi);
    cert.min_prevertex_gap = two_pi;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        cert.min_prevertex_gap = std::min(cert.min_prevertex_gap, sorted[i + 1] - sorted[i]);
    if (cert.min_prevertex_gap < 1e-12)
        cert.warnings.push_back("crowding: prevertex gap below 1e-12");

    std::vector<Complex> images;
    for (int i = 0; i < options.univalence_radii; ++i) {
        const double r = (i + 0.5) / options.univalence_radii * 0.999;
        for (int k = 0; k < options.univalence_angles; ++k)
            images.push_back(map.eval(std::polar(r, two_pi * (k + 0.25) / options.univalence_angles)));
    }
    cert.univalence_samples = static_cast<int>(images.size());
    cert.min_image_separation = 1e300;
    for (std::size_t i = 0; i < images.size(); ++i)
        for (std::size_t j = i + 1; j < images.size(); ++j)
            cert.min_image_separation = std::min(cert.min_image_separation, std::abs(images[i] - images[j]));
    if (!(cert.min_image_separation > 1e-12))
        cert.warnings.push_back("univalence: colliding images on the test grid");
    if (cert.residual() > 1e-8)
        throw ConvergenceError("build_koenigs_map: certificate residual too large", cert.residual(), cert.residual());
    return map;
}

FixedPoints locate_fixed_points(const KoenigsMap& map) { return {map.denjoy_wolff(), map.repulsive()}; }

// ---------------------------------------------------------------------------

SemigroupElement::SemigroupElement(std::shared_ptr<const KoenigsMap> map, double t) : map_(std::move(map)), t_(t) {
    if (!map_)
        throw DomainError("SemigroupElement: no map");
    if (!(t >= 0.0) || !std::isfinite(t))
        throw DomainError("SemigroupElement: t must be a non-negative real");
}

Complex SemigroupElement::operator()(Complex z) const {
    if (!(std::abs(z) < 1.0))
        throw DomainError("semigroup_apply: point outside the open disk");
    if (t_ == 0.0)
        return z;
    return map_->inverse(map_->eval(z) + t_);
}

Complex SemigroupElement::boundary_offset(const BoundaryPoint& xi, Complex u) const {
    if (t_ == 0.0)
        return -xi.value() * u;
    return map_->flow_offset(xi, u, t_);
}

Complex semigroup_apply(const SemigroupElement& element, Complex z) { return element(z); }

LogMultipliers exact_log_multipliers(const SlitStripDomain& domain, double t) {
    if (!(t >= 0.0))
        throw DomainError("exact_multipliers: t must be non-negative");
    LogMultipliers out;
    out.denjoy_wolff = -pi * t;
    for (double a : domain.alphas())
        out.repulsive.push_back(pi * t / a);
    return out;
}

inequality::MultiplierData exact_multipliers(const KoenigsMap& map, double t) {
    if (!(t > 0.0))
        throw DomainError("exact_multipliers: t must be positive");
    const auto logs = exact_log_multipliers(map.domain(), t);
    std::vector<inequality::FixedPointMultiplier> rep;
    for (std::size_t k = 0; k < logs.repulsive.size(); ++k)
        rep.push_back({map.repulsive()[k], logs.repulsive[k], 0.0, inequality::Provenance::exact});
    return inequality::MultiplierData({map.denjoy_wolff(), logs.denjoy_wolff, 0.0, inequality::Provenance::exact},
                                      std::move(rep));
}

angular::EstimateOptions semigroup_estimate_options() {
    angular::EstimateOptions o;
    o.infinity_threshold = 1e300;
    return o;
}

inequality::MultiplierData estimated_multipliers(std::shared_ptr<const KoenigsMap> map, double t,
                                                 const angular::EstimateOptions& options) {
    if (!(t > 0.0))
        throw DomainError("estimated_multipliers: t must be positive");
    const SemigroupElement phi(map, t);
    auto estimate = [&](const BoundaryPoint& p) {
        const auto e = angular::estimate_angular_derivative_adaptive(phi, p, options);
        if (e.infinite || !e.converged)
            throw ConvergenceError("estimated_multipliers: angular derivative does not settle", p.angle(), e.error);
        return inequality::FixedPointMultiplier::estimated(p, e.multiplier, e.error);
    };
    std::vector<inequality::FixedPointMultiplier> rep;
    for (const auto& xi : map->repulsive())
        rep.push_back(estimate(xi));
    return inequality::MultiplierData(estimate(map->denjoy_wolff()), std::move(rep));
}

} // namespace angulus::koenigs
