#include "angulus/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>

#include <boost/math/tools/roots.hpp>

namespace angulus::numerics {

namespace {

// QUADPACK qk15 abscissae/weights (Kronrod 15 with embedded Gauss 7).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

enum class PanelKind { regular, left_singular, right_singular };

struct Panel {
    double a;
    double b;
    PanelKind kind;
    Complex value;
    double error;
};

struct PanelOrder {
    bool operator()(const Panel& x, const Panel& y) const { return x.error < y.error; }
};

constexpr int kJacobiLow = 20;
constexpr int kJacobiHigh = 28;

const GaussRule& cached_jacobi(int n, double alpha, double beta) {
    static std::mutex guard;
    static std::map<std::tuple<int, double, double>, GaussRule> cache;
    std::lock_guard lock(guard);
    auto key = std::make_tuple(n, alpha, beta);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, gauss_jacobi(n, alpha, beta)).first;
    return it->second;
}

Panel kronrod_panel(const std::function<Complex(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const Complex fc = f(c);
    Complex kronrod = fc * kWgk[7];
    Complex gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const Complex sum = f(c - dx) + f(c + dx);
        kronrod += kWgk[j] * sum;
        if (j % 2 == 1)
            gauss += kWg[j / 2] * sum;
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, PanelKind::regular, kronrod, std::abs(kronrod - gauss)};
}

Complex jacobi_sum(const std::function<Complex(double)>& f, double a, double b, PanelKind kind,
                   double exponent, int n) {
    const double half = 0.5 * (b - a);
    // Weight (1+s)^mu for a left singularity, (1-s)^mu for a right one.
    const GaussRule& rule = kind == PanelKind::left_singular ? cached_jacobi(n, 0.0, exponent)
                                                             : cached_jacobi(n, exponent, 0.0);
    Complex sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double s = rule.nodes[i];
        const double x = a + half * (1.0 + s);
        const double dist = kind == PanelKind::left_singular ? half * (1.0 + s) : half * (1.0 - s);
        const double factor = std::pow(dist, exponent);
        sum += rule.weights[i] * f(x) / factor;
    }
    return sum * half * std::pow(half, exponent);
}

Panel jacobi_panel(const std::function<Complex(double)>& f, double a, double b, PanelKind kind,
                   double exponent) {
    const Complex low = jacobi_sum(f, a, b, kind, exponent, kJacobiLow);
    const Complex high = jacobi_sum(f, a, b, kind, exponent, kJacobiHigh);
    return {a, b, kind, high, std::abs(high - low)};
}

} // namespace

GaussRule gauss_jacobi(int n, double alpha, double beta) {
    if (n < 1)
        throw DomainError("gauss_jacobi: need at least one node");
    if (alpha <= -1.0 || beta <= -1.0)
        throw DomainError("gauss_jacobi: exponents must exceed -1");
    const double ab = alpha + beta;
    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(std::max(n - 1, 1));
    for (int k = 0; k < n; ++k) {
        const double denom = (2.0 * k + ab) * (2.0 * k + ab + 2.0);
        diag[k] = (k == 0) ? (beta - alpha) / (ab + 2.0)
                           : (beta * beta - alpha * alpha) / denom;
    }
    for (int k = 1; k < n; ++k) {
        double b2;
        if (k == 1) {
            b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
        } else {
            const double t = 2.0 * k + ab;
            b2 = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (t * t * (t + 1.0) * (t - 1.0));
        }
        sub[k - 1] = std::sqrt(b2);
    }
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                                std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
    if (n == 1) {
        rule.nodes[0] = diag[0];
        rule.weights[0] = mu0;
        return rule;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()[i];
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

QuadratureResult integrate(const std::function<Complex(double)>& f, const QuadratureSpec& spec) {
    if (!(spec.upper > spec.lower))
        throw DomainError("integrate: empty interval");
    if (spec.left_exponent <= -1.0 || spec.right_exponent <= -1.0)
        throw DomainError("integrate: endpoint exponents must exceed -1");
    if (!(spec.tolerance > 0.0 && spec.tolerance < 1.0))
        throw DomainError("integrate: tolerance must lie in (0, 1)");

    std::priority_queue<Panel, std::vector<Panel>, PanelOrder> queue;
    const bool left = spec.left_exponent != 0.0;
    const bool right = spec.right_exponent != 0.0;
    auto make = [&](double a, double b, PanelKind kind) {
        switch (kind) {
        case PanelKind::left_singular:
            return jacobi_panel(f, a, b, kind, spec.left_exponent);
        case PanelKind::right_singular:
            return jacobi_panel(f, a, b, kind, spec.right_exponent);
        default:
            return kronrod_panel(f, a, b);
        }
    };
    if (left && right) {
        const double mid = 0.5 * (spec.lower + spec.upper);
        queue.push(make(spec.lower, mid, PanelKind::left_singular));
        queue.push(make(mid, spec.upper, PanelKind::right_singular));
    } else if (left) {
        queue.push(make(spec.lower, spec.upper, PanelKind::left_singular));
    } else if (right) {
        queue.push(make(spec.lower, spec.upper, PanelKind::right_singular));
    } else {
        queue.push(make(spec.lower, spec.upper, PanelKind::regular));
    }

    Complex value = 0.0;
    double error = 0.0;
    double magnitude = 0.0;
    {
        auto copy = queue;
        while (!copy.empty()) {
            value += copy.top().value;
            error += copy.top().error;
            magnitude += std::abs(copy.top().value);
            copy.pop();
        }
    }
    while (error > spec.tolerance * std::abs(value) && error > 1e-15 * magnitude) {
        if (static_cast<int>(queue.size()) >= spec.max_panels)
            throw ConvergenceError("integrate: panel limit reached", value.real(), error);
        Panel worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b))
            throw ConvergenceError("integrate: interval cannot be bisected further", value.real(),
                                   error);
        PanelKind lower_kind = PanelKind::regular;
        PanelKind upper_kind = PanelKind::regular;
        if (worst.kind == PanelKind::left_singular)
            lower_kind = PanelKind::left_singular;
        if (worst.kind == PanelKind::right_singular)
            upper_kind = PanelKind::right_singular;
        const Panel lower = make(worst.a, mid, lower_kind);
        const Panel upper = make(mid, worst.b, upper_kind);
        value += lower.value + upper.value - worst.value;
        error = std::max(0.0, error + lower.error + upper.error - worst.error);
        magnitude += std::abs(lower.value) + std::abs(upper.value) - std::abs(worst.value);
        queue.push(lower);
        queue.push(upper);
    }
    const int panels = static_cast<int>(queue.size());
    // Re-sum to shed the drift of the running totals.
    value = 0.0;
    error = 0.0;
    while (!queue.empty()) {
        value += queue.top().value;
        error += queue.top().error;
        queue.pop();
    }
    return {value, error, panels};
}

// ---------------------------------------------------------------------------

SolveResult solve_system(const Residual& residual, RealVector x, const SolveOptions& options) {
    RealVector r = residual(x);
    double norm = r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
    RealVector best = x;
    double best_norm = norm;
    if (x.size() == 0) {
        if (norm > options.tolerance)
            throw SolveFailure("solve_system: no unknowns but residual is not zero", x, norm);
        return {x, norm, 0};
    }
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        if (norm <= options.tolerance)
            return {x, norm, iter};
        const Eigen::Index n = x.size();
        Eigen::MatrixXd jac(r.size(), n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double step = options.fd_step * std::max(1.0, std::abs(x[j]));
            RealVector xp = x;
            RealVector xm = x;
            xp[j] += step;
            xm[j] -= step;
            jac.col(j) = (residual(xp) - residual(xm)) / (2.0 * step);
        }
        const RealVector dx = -jac.colPivHouseholderQr().solve(r);
        if (!dx.allFinite())
            throw SolveFailure("solve_system: singular Jacobian", best, best_norm);

        double lambda = 1.0;
        bool accepted = false;
        const double merit = r.norm();
        while (lambda >= options.min_damping) {
            RealVector trial = x + lambda * dx;
            try {
                RealVector rt = residual(trial);
                if (rt.allFinite() && rt.norm() < merit) {
                    x = std::move(trial);
                    r = std::move(rt);
                    accepted = true;
                    break;
                }
            } catch (const DomainError&) {
                // infeasible trial point: shrink
            }
            lambda *= 0.5;
        }
        if (!accepted)
            throw SolveFailure("solve_system: line search failed", best, best_norm);
        norm = r.lpNorm<Eigen::Infinity>();
        if (norm < best_norm) {
            best = x;
            best_norm = norm;
        }
    }
    if (norm <= options.tolerance)
        return {x, norm, options.max_iterations};
    throw SolveFailure("solve_system: iteration limit reached", best, best_norm);
}

std::vector<double> ordered_angles(double start, double span, std::span<const double> logits) {
    std::vector<double> u(logits.size() + 1, 0.0);
    std::copy(logits.begin(), logits.end(), u.begin() + 1);
    const double top = *std::max_element(u.begin(), u.end());
    double total = 0.0;
    for (double& v : u) {
        v = std::exp(v - top);
        total += v;
    }
    std::vector<double> angles(logits.size());
    double acc = start;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        acc += span * u[k] / total;
        angles[k] = acc;
    }
    return angles;
}

std::vector<double> ordered_logits(double start, double span, std::span<const double> angles) {
    std::vector<double> gaps;
    double prev = start;
    for (double a : angles) {
        gaps.push_back(a - prev);
        prev = a;
    }
    gaps.push_back(start + span - prev);
    for (double g : gaps)
        if (!(g > 0.0))
            throw DomainError("ordered_logits: angles are not strictly increasing inside the span");
    std::vector<double> logits(angles.size());
    for (std::size_t k = 0; k < angles.size(); ++k)
        logits[k] = std::log(gaps[k + 1] / gaps[0]);
    return logits;
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double tolerance) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw DomainError("find_root: interval does not bracket a sign change");
    std::uintmax_t max_iter = 200;
    auto tol = [tolerance](double a, double b) {
        return std::abs(b - a) <= tolerance * std::max(1.0, std::abs(a));
    };
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, max_iter);
    return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Step {
    Complex z;
    Complex error;
    bool ok;
};

Step dp_step(const Field& field, double s, Complex z, double h) {
    try {
        const Complex k1 = field(s, z);
        const Complex k2 = field(s + c2 * h, z + h * (a21 * k1));
        const Complex k3 = field(s + c3 * h, z + h * (a31 * k1 + a32 * k2));
        const Complex k4 = field(s + c4 * h, z + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Complex k5 = field(s + c5 * h, z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Complex k6 =
            field(s + h, z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Complex z1 = z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Complex k7 = field(s + h, z1);
        const Complex err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const bool ok = std::isfinite(z1.real()) && std::isfinite(z1.imag()) &&
                        std::isfinite(err.real()) && std::isfinite(err.imag());
        return {z1, err, ok};
    } catch (const DomainError&) {
        return {z, 0.0, false};
    }
}

} // namespace

OdeSolution integrate_ode(const Field& field, Complex start, double s_begin, double s_end,
                          const OdeOptions& options) {
    if (!(s_end > s_begin))
        throw DomainError("integrate_ode: span must be increasing");
    OdeSolution sol;
    sol.samples.push_back({s_begin, start});
    double s = s_begin;
    Complex z = start;
    double h = std::min({options.initial_step, options.max_step, s_end - s_begin});
    double g_prev = options.event ? options.event(s, z) : 0.0;
    long steps = 0;

    while (s < s_end) {
        if (++steps > options.max_steps) {
            sol.termination = OdeTermination::max_steps;
            return sol;
        }
        const bool last = s + h >= s_end;
        const double step = last ? s_end - s : h;
        const Step st = dp_step(field, s, z, step);
        if (!st.ok) {
            h = 0.25 * step;
            if (h < options.min_step) {
                sol.termination = OdeTermination::stopped_at_singularity;
                return sol;
            }
            continue;
        }
        const double scale = options.tolerance * (1.0 + std::max(std::abs(z), std::abs(st.z)));
        const double ratio = std::abs(st.error) / scale;
        if (ratio > 1.0) {
            h = step * std::max(0.1, 0.9 * std::pow(ratio, -0.2));
            if (h < options.min_step) {
                sol.termination = OdeTermination::stopped_at_singularity;
                return sol;
            }
            continue;
        }
        // accepted
        const double s_new = last ? s_end : s + step;
        if (options.event) {
            const double g_new = options.event(s_new, st.z);
            if (g_prev < 0.0 && g_new >= 0.0) {
                double lo = 0.0;
                double hi = step;
                Complex z_hi = st.z;
                for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(s)); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const Step trial = dp_step(field, s, z, mid);
                    if (!trial.ok) {
                        hi = mid;
                        continue;
                    }
                    if (options.event(s + mid, trial.z) < 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                        z_hi = trial.z;
                    }
                }
                sol.error_estimate += std::abs(st.error);
                sol.samples.push_back({s + hi, z_hi});
                sol.termination = OdeTermination::event_located;
                return sol;
            }
            g_prev = g_new;
        }
        s = s_new;
        z = st.z;
        sol.error_estimate += std::abs(st.error);
        sol.samples.push_back({s, z});
        if (options.stop && options.stop(s, z)) {
            sol.termination = OdeTermination::stopped_by_predicate;
            return sol;
        }
        const double grow = ratio > 0.0 ? std::min(5.0, 0.9 * std::pow(ratio, -0.2)) : 5.0;
        h = std::min(step * grow, options.max_step);
    }
    sol.termination = OdeTermination::reached_end;
    return sol;
}

// ---------------------------------------------------------------------------

ExtrapolationResult extrapolate_limit(std::span<const ExtrapolationSample> samples) {
    const std::size_t n = samples.size();
    if (n < 3)
        throw DomainError("extrapolate_limit: need at least three samples");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(samples[i].h > 0.0))
            throw DomainError("extrapolate_limit: step sizes must be positive");
        if (i > 0 && !(samples[i].h < samples[i - 1].h))
            throw DomainError("extrapolate_limit: step sizes must decrease");
    }

    const double first_diff = std::abs(samples[1].value - samples[0].value);
    const double last_diff = std::abs(samples[n - 1].value - samples[n - 2].value);
    if (first_diff > 0.0 && last_diff >= first_diff) {
        ExtrapolationResult raw;
        raw.limit = samples[n - 1].value;
        raw.error = last_diff;
        raw.monotone = false;
        return raw;
    }

    // T[i][j] interpolates samples i-j..i and is evaluated at h = 0.
    std::vector<std::vector<Complex>> table(n);
    for (std::size_t i = 0; i < n; ++i) {
        table[i].resize(i + 1);
        table[i][0] = samples[i].value;
        for (std::size_t j = 1; j <= i; ++j) {
            const double hi = samples[i].h;
            const double hl = samples[i - j].h;
            table[i][j] = (hi * table[i - 1][j - 1] - hl * table[i][j - 1]) / (hi - hl);
        }
    }
    ExtrapolationResult best;
    best.limit = table[1][1];
    best.error = std::abs(table[1][1] - table[0][0]);
    best.order = 1;
    for (std::size_t i = 2; i < n; ++i) {
        const double diff = std::abs(table[i][i] - table[i - 1][i - 1]);
        if (diff <= best.error) {
            best.limit = table[i][i];
            best.error = diff;
            best.order = static_cast<int>(i);
        }
    }
    return best;
}

} // namespace angulus::numerics
