#include "angulus/quaddiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace angulus::quaddiff {

using numerics::pi;

std::vector<double> StarQuadDiff::betas() const {
    std::vector<double> b;
    for (const auto& z : zeros) b.push_back(z.angle());
    return b;
}

Complex StarQuadDiff::sqrt_A() const {
    Complex s = std::sqrt(A);
    if (s.real() < 0.0 || (s.real() == 0.0 && s.imag() < 0.0)) s = -s;
    return s;
}

namespace {

struct Singularities {
    std::vector<Complex> poles;
    std::vector<Complex> zeros;
};

Singularities singular_points(const StarQuadDiff& qd) {
    Singularities s;
    s.poles.push_back(qd.a.value());
    for (const auto& x : qd.xi) s.poles.push_back(x.value());
    for (const auto& z : qd.zeros) s.zeros.push_back(z.value());
    return s;
}

void check_pole(const StarQuadDiff& qd, Complex z) {
    if (std::abs(z - qd.a.value()) < 1e-15) throw DomainError("pole at a");
    for (std::size_t k = 0; k < qd.xi.size(); ++k)
        if (std::abs(z - qd.xi[k].value()) < 1e-15) throw DomainError("pole at xi_" + std::to_string(k + 1));
}

// prod (z - zeta) / ((z - a) prod (z - xi)), skipping pole `skip` (0 = a, k = xi_k)
Complex ratio(const StarQuadDiff& qd, Complex z, std::size_t skip = std::size_t(-1)) {
    Complex r(1.0, 0.0);
    for (const auto& zz : qd.zeros) r *= z - zz.value();
    if (skip != 0) r /= z - qd.a.value();
    for (std::size_t k = 0; k < qd.xi.size(); ++k)
        if (skip != k + 1) r /= z - qd.xi[k].value();
    return r;
}

double min_distance(Complex z, const std::vector<Complex>& pts) {
    double d = std::numeric_limits<double>::infinity();
    for (auto p : pts) d = std::min(d, std::abs(z - p));
    return d;
}

} // namespace

Complex eval_Q(const StarQuadDiff& qd, Complex z) {
    check_pole(qd, z);
    Complex r = ratio(qd, z);
    return qd.A * r * r;
}

Complex sqrt_Q(const StarQuadDiff& qd, Complex z) {
    check_pole(qd, z);
    return qd.sqrt_A() * ratio(qd, z);
}

double circle_argument(const StarQuadDiff& qd) {
    auto sing = singular_points(qd);
    std::vector<Complex> all = sing.poles;
    all.insert(all.end(), sing.zeros.begin(), sing.zeros.end());
    double best_theta = 0.0, best_d = -1.0;
    for (int i = 0; i < 256; ++i) {
        double th = 2.0 * pi * (i + 0.5) / 256;
        double d = min_distance(std::polar(1.0, th), all);
        if (d > best_d) best_d = d, best_theta = th;
    }
    Complex z = std::polar(1.0, best_theta);
    Complex r = ratio(qd, z);
    Complex p = r * r * (Complex(0.0, 1.0) * z) * (Complex(0.0, 1.0) * z);
    return -std::arg(p);
}

std::vector<double> residue_heights(const StarQuadDiff& qd) {
    std::vector<double> h;
    const double s = std::sqrt(std::abs(qd.A));
    for (std::size_t k = 0; k < qd.xi.size(); ++k) h.push_back(pi * s * std::abs(ratio(qd, qd.xi[k].value(), k + 1)));
    return h;
}

namespace {

struct Arc {
    double start;
    double span; // signed
};

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

} // namespace

StarQuadDiff solve_parameters(const BoundaryPoint& a, const std::vector<BoundaryPoint>& xi,
                              const std::vector<double>& alphas, const SolveOptions& options) {
    const std::size_t n = xi.size();
    if (n == 0) throw DomainError("at least one repulsive point is required");
    if (alphas.size() != n) throw DomainError("one height per repulsive point is required");
    double total = 0.0;
    for (double al : alphas) {
        if (!(al > 0.0)) throw DomainError("heights must be positive");
        total += al;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("heights must sum to 1");
    std::vector<BoundaryPoint> pts{a};
    pts.insert(pts.end(), xi.begin(), xi.end());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (std::abs(pts[i].value() - pts[j].value()) < 1e-12) throw DomainError("points must be distinct");

    // zero j lives on the arc xi_j -> xi_{j+1} that avoids a
    std::vector<Arc> arcs;
    int orientation = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double d = geometry::ccw_distance(xi[j], xi[j + 1]);
        bool a_inside = geometry::ccw_distance(xi[j], a) < d;
        int o = a_inside ? -1 : 1;
        if (orientation != 0 && o != orientation) throw DomainError("points are not in cyclic order");
        orientation = o;
        arcs.push_back(a_inside ? Arc{xi[j].angle(), -(2.0 * pi - d)} : Arc{xi[j].angle(), d});
    }
    if (n > 2) {
        // the arcs must tile the circle minus a once
        double covered = 0.0;
        for (const auto& arc : arcs) covered += std::abs(arc.span);
        double gap = orientation > 0 ? geometry::ccw_distance(xi[n - 1], xi[0]) : geometry::ccw_distance(xi[0], xi[n - 1]);
        if (std::abs(covered + gap - 2.0 * pi) > 1e-9) throw DomainError("points are not in cyclic order");
    }

    StarQuadDiff qd;
    qd.a = a;
    qd.xi = xi;
    qd.alphas = alphas;
    qd.zeros.resize(n - 1);

    numerics::RealVector guess(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double u = 0.0;
        if (j < options.initial_betas.size()) {
            double off = options.initial_betas[j] - arcs[j].start;
            if (arcs[j].span > 0.0) off = std::fmod(std::fmod(off, 2 * pi) + 2 * pi, 2 * pi);
            else off = -std::fmod(std::fmod(-off, 2 * pi) + 2 * pi, 2 * pi);
            double f = off / arcs[j].span;
            if (!(f > 0.0 && f < 1.0)) {
                qd.warnings.push_back("initial beta_" + std::to_string(j + 1) + " projected onto its arc");
                f = std::clamp(f, 0.05, 0.95);
            }
            u = std::log(f / (1.0 - f));
        }
        guess[static_cast<Eigen::Index>(j)] = u;
    }
    auto unpack = [&](const numerics::RealVector& x, StarQuadDiff& q) {
        for (std::size_t j = 0; j + 1 < n; ++j)
            q.zeros[j] = BoundaryPoint(arcs[j].start + arcs[j].span * sigmoid(x[static_cast<Eigen::Index>(j)]));
        q.A = std::exp(x[static_cast<Eigen::Index>(n - 1)]);
    };
    {
        numerics::RealVector probe = guess;
        probe[static_cast<Eigen::Index>(n - 1)] = 0.0;
        unpack(probe, qd);
        double s = 0.0;
        for (double h : residue_heights(qd)) s += h;
        guess[static_cast<Eigen::Index>(n - 1)] = -2.0 * std::log(s);
    }

    StarQuadDiff work = qd;
    auto residual = [&](const numerics::RealVector& x) {
        unpack(x, work);
        auto h = residue_heights(work);
        numerics::RealVector r(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k) r[static_cast<Eigen::Index>(k)] = h[k] - alphas[k];
        return r;
    };
    numerics::SolveOptions so;
    so.tolerance = options.tolerance;
    so.max_iterations = options.max_iterations;
    auto res = numerics::solve_system(residual, guess, so);
    unpack(res.root, qd);
    qd.A = std::abs(qd.A) * std::polar(1.0, circle_argument(qd));
    qd.iterations = res.iterations;
    qd.residual = res.residual_norm;
    return qd;
}

double circle_trajectory_residual(const StarQuadDiff& qd, int samples, double exclusion) {
    auto sing = singular_points(qd);
    std::vector<Complex> all = sing.poles;
    all.insert(all.end(), sing.zeros.begin(), sing.zeros.end());
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        Complex z = std::polar(1.0, 2.0 * pi * i / samples);
        if (min_distance(z, all) < exclusion) continue;
        Complex iz = Complex(0.0, 1.0) * z;
        Complex v = eval_Q(qd, z) * iz * iz;
        worst = std::max(worst, std::abs(v.imag()) / std::abs(v));
    }
    return worst;
}

const char* to_string(Termination t) {
    switch (t) {
    case Termination::reached_length: return "reached length";
    case Termination::reached_circle: return "reached circle";
    case Termination::hit_pole: return "hit pole";
    case Termination::hit_critical_point: return "hit critical point";
    case Termination::step_failure: return "step failure";
    }
    return "?";
}

namespace {

double point_segment(Complex p, Complex a, Complex b) {
    Complex d = b - a;
    double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(p - a);
    double t = std::clamp(((p - a) * std::conj(d)).real() / len2, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

Trajectory trace_signed(const StarQuadDiff& qd, Complex z0, TrajectoryType type, double max_length,
                        const TraceOptions& opt, double sign) {
    auto sing = singular_points(qd);
    const Complex e = type == TrajectoryType::trajectory ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
    numerics::Field field = [&](double, Complex z) {
        if (min_distance(z, sing.zeros) < opt.critical_radius) throw DomainError("critical point");
        return sign * e / sqrt_Q(qd, z);
    };

    numerics::OdeOptions o;
    o.tolerance = opt.tolerance;
    o.max_step = opt.max_step;
    o.initial_step = std::min(1e-4, opt.max_step);
    o.min_step = 1e-15;
    // a chord that passes a zero means the step jumped across it
    Complex prev = z0;
    bool crossed = false;
    o.stop = [&](double, Complex z) {
        for (auto zz : sing.zeros)
            if (point_segment(zz, prev, z) < opt.critical_radius) crossed = true;
        prev = z;
        return crossed || min_distance(z, sing.poles) < opt.pole_radius;
    };
    if (std::abs(z0) < 1.0 - 1e-12) o.event = [](double, Complex z) { return std::norm(z) - 1.0; };

    auto sol = numerics::integrate_ode(field, z0, 0.0, max_length, o);
    Trajectory tr;
    tr.type = type;
    for (const auto& smp : sol.samples) {
        tr.points.push_back(smp.z);
        tr.lengths.push_back(smp.s);
    }
    const Complex last = sol.back().z;
    auto near_critical = [&](double r) { return min_distance(last, sing.zeros) < r; };
    switch (sol.termination) {
    case numerics::OdeTermination::reached_end: tr.termination = Termination::reached_length; break;
    case numerics::OdeTermination::event_located: tr.termination = Termination::reached_circle; break;
    case numerics::OdeTermination::stopped_by_predicate:
        tr.termination = crossed ? Termination::hit_critical_point : Termination::hit_pole;
        break;
    default:
        tr.termination = near_critical(1e-3) ? Termination::hit_critical_point : Termination::step_failure;
        break;
    }
    return tr;
}

void check_start(const StarQuadDiff& qd, Complex z0, const TraceOptions& opt) {
    auto sing = singular_points(qd);
    if (std::abs(z0) > 1.0 + 1e-12) throw DomainError("start point outside the closed disk");
    if (min_distance(z0, sing.zeros) < opt.critical_radius) throw DomainError("hit critical point");
    if (min_distance(z0, sing.poles) < opt.pole_radius) throw DomainError("start point is a pole");
}

} // namespace

Trajectory trace_trajectory(const StarQuadDiff& qd, Complex z0, TrajectoryType type, double max_length,
                            const TraceOptions& options) {
    check_start(qd, z0, options);
    if (!(max_length > 0.0)) throw DomainError("max_length must be positive");
    const Complex e = type == TrajectoryType::trajectory ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
    Complex v = e / sqrt_Q(qd, z0);
    double turn = std::abs(z0) > 1e-14 ? (std::conj(Complex(0.0, 1.0) * z0) * v).real() : v.real();
    double sign = turn >= 0.0 ? 1.0 : -1.0;
    if (options.direction < 0) sign = -sign;
    return trace_signed(qd, z0, type, max_length, options, sign);
}

std::vector<double> heights(const StarQuadDiff& qd) {
    auto sing = singular_points(qd);
    std::vector<double> out;
    auto res = residue_heights(qd);
    for (std::size_t k = 0; k < qd.xi.size(); ++k) {
        Complex p = qd.xi[k].value();
        double gap = std::numeric_limits<double>::infinity();
        for (auto q : sing.poles)
            if (q != p) gap = std::min(gap, std::abs(q - p));
        gap = std::min(gap, min_distance(p, sing.zeros));
        Complex z0 = p * (1.0 - std::min(0.05, 0.05 * gap));
        TraceOptions opt;
        opt.tolerance = 1e-13;
        double total = 0.0;
        for (int dir : {1, -1}) {
            opt.direction = dir;
            auto tr = trace_trajectory(qd, z0, TrajectoryType::orthogonal, 10.0 * (1.0 + res[k]), opt);
            if (tr.termination != Termination::reached_circle)
                throw ConvergenceError(std::string("height trace near xi_") + std::to_string(k + 1) + " ended with " +
                                           to_string(tr.termination) + " at (" + std::to_string(tr.points.back().real()) +
                                           ", " + std::to_string(tr.points.back().imag()) + ")",
                                       total, std::abs(tr.points.back()));
            total += tr.lengths.back();
        }
        out.push_back(total);
    }
    return out;
}

StarQuadDiff scaled(const StarQuadDiff& qd, double s) {
    if (!(s > 0.0)) throw DomainError("scale must be positive");
    StarQuadDiff q = qd;
    q.A *= s;
    return q;
}

OdeResidual extremal_ode_residual(const StarQuadDiff& qd, const angular::SelfMapEvaluator& phi, double exclusion,
                                  int n_radii, int n_angles) {
    auto sing = singular_points(qd);
    OdeResidual out;
    const double h = 1e-6;
    for (int i = 1; i <= n_radii; ++i) {
        double r = double(i) / (n_radii + 1);
        for (int j = 0; j < n_angles; ++j) {
            Complex z = std::polar(r, 2.0 * pi * j / n_angles);
            if (min_distance(z, sing.poles) < exclusion) {
                ++out.skipped;
                continue;
            }
            Complex w = phi(z);
            if (min_distance(w, sing.zeros) < exclusion) {
                ++out.skipped;
                continue;
            }
            Complex d = (phi(z + h) - phi(z - h)) / (2.0 * h);
            Complex f = (w - qd.a.value()) / (z - qd.a.value());
            for (const auto& zz : qd.zeros) f *= (z - zz.value()) / (w - zz.value());
            for (const auto& x : qd.xi) f *= (w - x.value()) / (z - x.value());
            double res = std::abs(d - f);
            ++out.evaluated;
            if (res > out.max_residual) out.max_residual = res, out.worst_point = z;
        }
    }
    return out;
}

std::vector<Trajectory> slit_arcs(const StarQuadDiff& qd, double max_length, const TraceOptions& options) {
    std::vector<Trajectory> arcs;
    for (const auto& zz : qd.zeros) {
        Complex zeta = zz.value();
        Complex z0 = zeta * (1.0 - 10.0 * options.critical_radius);
        check_start(qd, z0, options);
        Complex v = 1.0 / sqrt_Q(qd, z0);
        double sign = (std::conj(-zeta) * v).real() >= 0.0 ? 1.0 : -1.0;
        // lengths count from the zero; R is linear there, so the skipped piece is |R(z0)| d / 2
        double s0 = 0.5 * std::abs(sqrt_Q(qd, z0)) * std::abs(z0 - zeta);
        auto tr = trace_signed(qd, z0, TrajectoryType::trajectory, max_length - s0, options, sign);
        tr.points.insert(tr.points.begin(), zeta);
        tr.lengths.insert(tr.lengths.begin(), -s0);
        for (auto& l : tr.lengths) l += s0;
        arcs.push_back(std::move(tr));
    }
    return arcs;
}

namespace {

double directed(const std::vector<Complex>& p, const std::vector<Complex>& q) {
    double worst = 0.0;
    for (auto x : p) {
        double best = std::numeric_limits<double>::infinity();
        if (q.size() == 1) best = std::abs(x - q[0]);
        for (std::size_t i = 0; i + 1 < q.size(); ++i) best = std::min(best, point_segment(x, q[i], q[i + 1]));
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace

double hausdorff_distance(const std::vector<Complex>& p, const std::vector<Complex>& q) {
    if (p.empty() || q.empty()) throw DomainError("empty polyline");
    return std::max(directed(p, q), directed(q, p));
}

double orbit_trajectory_distance(const StarQuadDiff& qd, const std::vector<Complex>& orbit, double length,
                                 double max_step) {
    if (orbit.size() < 2)
        throw DomainError("orbit_trajectory_distance: need at least two orbit points");
    TraceOptions opt;
    opt.max_step = max_step;
    auto tr = trace_trajectory(qd, orbit[0], TrajectoryType::trajectory, length, opt);
    // compare the first steps; the turning rule is void at the origin
    if (tr.points.size() < 2 || (std::conj(orbit[1] - orbit[0]) * (tr.points[1] - orbit[0])).real() < 0.0) {
        opt.direction = -1;
        tr = trace_trajectory(qd, orbit[0], TrajectoryType::trajectory, length, opt);
    }
    return hausdorff_distance(orbit, tr.points);
}

} // namespace angulus::quaddiff
