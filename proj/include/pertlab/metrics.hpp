#pragma once

#include "pertlab/algebra.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace pertlab {

/// Certified interval returned by the metric estimators. `lower` is always
/// certified by a witness; `upper` is certified only for the inner
/// (convex) problem, outer sup estimates flag it non-certified.
struct Bracket {
    double lower = 0.0;
    double upper = 0.0;
    bool upper_certified = true;
    std::optional<Mat> witness;
};

struct MetricConfig {
    int restarts = 6;
    int inner_iterations = 200;
    double inner_tolerance = 1e-9;
    int amplification_cutoff = 4;  // n_max for row/matrix amplifications
    std::uint64_t seed = 0;
};

/// Distance from an ambient element x to the operator unit ball of B:
/// min |x - b| over b in span(B), |b| <= 1. Projected subgradient descent
/// with Dykstra projections onto span(B) intersect ball. upper is attained
/// by the witness; lower combines the Frobenius distance to span(B) and
/// op_norm(x) - 1.
Bracket dist_to_unit_ball(const Mat& x, const ConcreteAlgebra& b, const MetricConfig& cfg);

/// Same over M_{block_rows, block_cols}(B): x holds ambient-sized blocks.
Bracket dist_to_amplified_unit_ball(const Mat& x, const ConcreteAlgebra& b,
                                    int block_rows, int block_cols,
                                    const MetricConfig& cfg);

/// Kadison-Kastler distance estimate: max of the two sup-inf terms over
/// the unit balls. Outer sup by seeded multistart plus hill climbing.
Bracket kk_distance(const ConcreteAlgebra& a, const ConcreteAlgebra& b,
                    const MetricConfig& cfg);

/// d over M_n(A) vs M_n(B).
Bracket amplified_distance(const ConcreteAlgebra& a, const ConcreteAlgebra& b, int n,
                           const MetricConfig& cfg);

struct RowDistanceReport {
    std::vector<Bracket> per_n;  // n = 1 .. amplification_cutoff
    Bracket overall;             // running max
};

/// sup over n <= cutoff of d(M_{1,n}(A), M_{1,n}(B)) with the row norm.
RowDistanceReport row_distance(const ConcreteAlgebra& a, const ConcreteAlgebra& b,
                               const MetricConfig& cfg);

/// Lower estimate of the row norm sup_n |phi^{(1,n)}| of a linear map on
/// the ambient algebra, sampling rows with entries in `domain`. The upper
/// endpoint is +inf (not certified by sampling).
Bracket row_norm_of_map(const std::function<Mat(const Mat&)>& phi,
                        const ConcreteAlgebra& domain, int n_max,
                        const MetricConfig& cfg);

/// Row norm sqrt(|sum_j x_j x_j*|) of a 1 x n block row.
double row_norm(const Mat& x, int ambient_dim);

}  // namespace pertlab
