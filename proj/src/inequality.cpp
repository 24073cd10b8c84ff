#include "angulus/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace angulus::inequality {

namespace {

constexpr double degenerate_tolerance = 1e-12;

Verdict classify_slack(double slack, double error) {
    if (slack >= error)
        return Verdict::holds;
    if (slack < -error)
        return Verdict::fails;
    return Verdict::indeterminate;
}

// floating-point error of a sum of terms of total size `size`
double rounding_bound(double size) { return 8.0 * std::numeric_limits<double>::epsilon() * size; }

void check_not_degenerate(const MultiplierData& data) {
    if (std::abs(data.denjoy_wolff().log_multiplier) < degenerate_tolerance)
        throw DomainError("degenerate multiplier at the Denjoy-Wolff point");
    for (const auto& r : data.repulsive())
        if (std::abs(r.log_multiplier) < degenerate_tolerance)
            throw DomainError("degenerate multiplier at a repulsive point");
}

} // namespace

double FixedPointMultiplier::multiplier() const { return std::exp(log_multiplier); }

FixedPointMultiplier FixedPointMultiplier::exact(BoundaryPoint p, double multiplier) {
    if (!(multiplier > 0.0))
        throw DomainError("multipliers at boundary fixed points are positive");
    return {p, std::log(multiplier), 0.0, Provenance::exact};
}

FixedPointMultiplier FixedPointMultiplier::estimated(BoundaryPoint p, double multiplier,
                                                     double abs_error) {
    if (!(multiplier > 0.0))
        throw DomainError("multipliers at boundary fixed points are positive");
    if (!(abs_error >= 0.0))
        throw DomainError("error bounds are non-negative");
    return {p, std::log(multiplier), abs_error / multiplier, Provenance::estimated};
}

MultiplierData::MultiplierData(FixedPointMultiplier denjoy_wolff,
                               std::vector<FixedPointMultiplier> repulsive)
    : dw_(denjoy_wolff), repulsive_(std::move(repulsive)) {
    if (repulsive_.empty())
        throw DomainError("MultiplierData: at least one repulsive point is required");
    if (!(dw_.log_multiplier < 0.0))
        throw DomainError("MultiplierData: phi'(a) must lie in (0, 1)");
    for (const auto& r : repulsive_)
        if (!(r.log_multiplier > 0.0))
            throw DomainError("MultiplierData: repulsive multipliers must exceed 1");
    std::vector<double> angles{dw_.point.angle()};
    for (const auto& r : repulsive_)
        angles.push_back(r.point.angle());
    for (std::size_t i = 0; i < angles.size(); ++i)
        for (std::size_t j = i + 1; j < angles.size(); ++j)
            if (std::abs(std::polar(1.0, angles[i]) - std::polar(1.0, angles[j])) < 1e-12)
                throw DomainError("MultiplierData: fixed points must be distinct");
}

std::vector<double> MultiplierData::log_repulsive() const {
    std::vector<double> c;
    c.reserve(repulsive_.size());
    for (const auto& r : repulsive_)
        c.push_back(r.log_multiplier);
    return c;
}

bool MultiplierData::all_exact() const {
    return dw_.provenance == Provenance::exact &&
           std::all_of(repulsive_.begin(), repulsive_.end(),
                       [](const auto& r) { return r.provenance == Provenance::exact; });
}

WeightVector::WeightVector(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty())
        throw DomainError("WeightVector: empty");
    double sum = 0.0;
    for (double w : w_) {
        if (!(w >= 0.0))
            throw DomainError("WeightVector: weights must be non-negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw DomainError("WeightVector: weights must sum to one");
}

InequalityReport verify_unweighted(const MultiplierData& data) {
    check_not_degenerate(data);
    InequalityReport rep;
    rep.theorem = "unweighted";
    double err = 0.0, size = 0.0;
    for (const auto& r : data.repulsive()) {
        rep.left += 1.0 / r.log_multiplier;
        size += std::abs(1.0 / r.log_multiplier);
        err += r.log_error / (r.log_multiplier * r.log_multiplier);
    }
    const double la = data.denjoy_wolff().log_multiplier;
    rep.right = -1.0 / la;
    err += data.denjoy_wolff().log_error / (la * la);
    rep.slack = rep.right - rep.left;
    rep.error = err + rounding_bound(size + std::abs(rep.right));
    rep.verdict = classify_slack(rep.slack, rep.error);
    return rep;
}

InequalityReport verify_weighted(const MultiplierData& data, const WeightVector& weights) {
    check_not_degenerate(data);
    if (weights.size() != data.size())
        throw DomainError("verify_weighted: weight count does not match the repulsive points");
    InequalityReport rep;
    rep.theorem = "weighted";
    rep.weights = weights.values();
    double err = 0.0, size = 0.0;
    for (std::size_t k = 0; k < data.size(); ++k) {
        const double w2 = weights[k] * weights[k];
        rep.left += w2 * data.repulsive()[k].log_multiplier;
        size += std::abs(w2 * data.repulsive()[k].log_multiplier);
        err += w2 * data.repulsive()[k].log_error;
    }
    rep.right = -data.denjoy_wolff().log_multiplier;
    err += data.denjoy_wolff().log_error;
    rep.slack = rep.left - rep.right;
    rep.error = err + rounding_bound(size + std::abs(rep.right));
    rep.verdict = classify_slack(rep.slack, rep.error);
    return rep;
}

std::vector<double> project_to_simplex(std::span<const double> v) {
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        cumulative += sorted[k];
        const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (sorted[k] - t > 0.0)
            theta = t;
    }
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        out[k] = std::max(v[k] - theta, 0.0);
    return out;
}

OptimalWeights optimal_weights(std::span<const double> c) {
    if (c.empty())
        throw DomainError("optimal_weights: no coefficients");
    for (double ck : c)
        if (!(ck > 0.0))
            throw DomainError("optimal_weights: every log-multiplier must be positive");

    double inv_sum = 0.0;
    for (double ck : c)
        inv_sum += 1.0 / ck;
    std::vector<double> w(c.size());
    for (std::size_t k = 0; k < c.size(); ++k)
        w[k] = (1.0 / c[k]) / inv_sum;
    const double closed_min = 1.0 / inv_sum;

    // Projected gradient on the simplex, step 1/L with L = 2 max c.
    std::vector<double> x(c.size(), 1.0 / static_cast<double>(c.size()));
    const double step = 1.0 / (2.0 * *std::max_element(c.begin(), c.end()));
    for (int it = 0; it < 20000; ++it) {
        std::vector<double> y(x.size());
        for (std::size_t k = 0; k < x.size(); ++k)
            y[k] = x[k] - step * 2.0 * c[k] * x[k];
        auto next = project_to_simplex(y);
        double move = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k)
            move = std::max(move, std::abs(next[k] - x[k]));
        x = std::move(next);
        if (move < 1e-15)
            break;
    }
    double numeric_min = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k)
        numeric_min += x[k] * x[k] * c[k];
    const double gap = std::abs(numeric_min - closed_min);
    if (gap > 1e-8 * std::max(1.0, closed_min))
        throw ConvergenceError("optimal_weights: numerical minimization disagrees with the closed form",
                               numeric_min, gap);
    // renormalize against rounding before validation
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& wk : w)
        wk /= total;
    return {WeightVector(std::move(w)), closed_min, gap};
}

OptimalWeights optimal_weights(const MultiplierData& data) {
    const auto c = data.log_repulsive();
    return optimal_weights(c);
}

RecoveryReport recover_unweighted(const MultiplierData& data) {
    RecoveryReport rep;
    const OptimalWeights best = optimal_weights(data);
    rep.weighted = verify_weighted(data, best.weights);
    rep.unweighted = verify_unweighted(data);
    const double la = data.denjoy_wolff().log_multiplier;
    double inv_sum = 0.0;
    for (double ck : data.log_repulsive())
        inv_sum += 1.0 / ck;
    rep.consistency_residual = std::abs(rep.weighted.slack * inv_sum / (-la) - rep.unweighted.slack);
    const auto sign = [](double s) { return (s > 1e-14) - (s < -1e-14); };
    rep.signs_agree = sign(rep.weighted.slack) == sign(rep.unweighted.slack);
    return rep;
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::holds:
        return "holds";
    case Verdict::fails:
        return "fails";
    default:
        return "indeterminate";
    }
}

} // namespace angulus::inequality
