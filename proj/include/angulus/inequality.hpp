#pragma once

#include <span>
#include <string>
#include <vector>

#include "angulus/geometry.hpp"

/// Angular-derivative inequalities for univalent self-maps of the disk with a
/// boundary Denjoy-Wolff point a and repulsive boundary fixed points xi_k:
///
///   unweighted:  sum_k 1 / log phi'(xi_k) <= -1 / log phi'(a)
///   weighted:    prod_k phi'(xi_k)^(w_k^2) >= 1 / phi'(a),  w_k >= 0, sum w_k = 1
///
/// All arithmetic is carried out on log-multipliers so that values such as
/// exp(2 pi t / w) never overflow.
namespace angulus::inequality {

using geometry::BoundaryPoint;

enum class Provenance { exact, estimated };

/// A boundary fixed point with its multiplier stored as log phi'(p) and an
/// absolute error bound on that log (a relative error on the multiplier).
struct FixedPointMultiplier {
    BoundaryPoint point;
    double log_multiplier = 0.0;
    double log_error = 0.0;
    Provenance provenance = Provenance::exact;

    double multiplier() const;
    static FixedPointMultiplier exact(BoundaryPoint p, double multiplier);
    static FixedPointMultiplier estimated(BoundaryPoint p, double multiplier, double abs_error);
};

/// Validated: phi'(a) in (0, 1), every phi'(xi_k) > 1, points pairwise distinct.
class MultiplierData {
public:
    MultiplierData(FixedPointMultiplier denjoy_wolff, std::vector<FixedPointMultiplier> repulsive);

    const FixedPointMultiplier& denjoy_wolff() const noexcept { return dw_; }
    const std::vector<FixedPointMultiplier>& repulsive() const noexcept { return repulsive_; }
    std::size_t size() const noexcept { return repulsive_.size(); }
    /// c_k = log phi'(xi_k).
    std::vector<double> log_repulsive() const;
    bool all_exact() const;

private:
    FixedPointMultiplier dw_;
    std::vector<FixedPointMultiplier> repulsive_;
};

/// Non-negative weights summing to one (within 1e-12).
class WeightVector {
public:
    explicit WeightVector(std::vector<double> weights);
    const std::vector<double>& values() const noexcept { return w_; }
    std::size_t size() const noexcept { return w_.size(); }
    double operator[](std::size_t k) const { return w_[k]; }

private:
    std::vector<double> w_;
};

/// holds: slack >= error. fails: slack < -error. Otherwise the error bar
/// straddles zero; exact data in an equality case land here, since the error
/// always includes floating-point rounding of the sums.
enum class Verdict { holds, fails, indeterminate };

struct InequalityReport {
    std::string theorem; ///< "unweighted" or "weighted"
    double left = 0.0;   ///< unweighted: sum 1/c_k.  weighted: sum w_k^2 c_k (log of the product)
    double right = 0.0;  ///< unweighted: -1/log phi'(a).  weighted: -log phi'(a)
    double slack = 0.0;  ///< oriented so that the inequality reads slack >= 0
    double error = 0.0;  ///< first-order propagation of the multiplier errors plus a rounding bound
    Verdict verdict = Verdict::holds;
    std::vector<double> weights; ///< weighted form only

    /// The inequality is consistent with the data: slack >= -error.
    bool satisfied() const noexcept { return slack >= -error; }
};

InequalityReport verify_unweighted(const MultiplierData& data);
InequalityReport verify_weighted(const MultiplierData& data, const WeightVector& weights);

struct OptimalWeights {
    WeightVector weights;
    double minimal_value;      ///< min over the simplex of sum w_k^2 c_k
    double numerical_gap;      ///< |closed form - projected-gradient minimum|
};

/// Minimizer of f(w) = sum w_k^2 c_k over the simplex: w_k proportional to
/// 1/c_k, with minimum 1 / sum(1/c_k). Cross-checked against a projected
/// gradient minimization; a disagreement above 1e-8 throws ConvergenceError.
OptimalWeights optimal_weights(std::span<const double> log_repulsive);
OptimalWeights optimal_weights(const MultiplierData& data);

struct RecoveryReport {
    InequalityReport weighted;   ///< at the optimal weights
    InequalityReport unweighted;
    /// |slack_w * S / (-log phi'(a)) - slack_u| with S = sum 1/c_k. The two
    /// slacks are algebraically tied by this identity, so it measures rounding only.
    double consistency_residual = 0.0;
    bool signs_agree = true;
};

RecoveryReport recover_unweighted(const MultiplierData& data);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::span<const double> v);

const char* to_string(Verdict v);

} // namespace angulus::inequality
