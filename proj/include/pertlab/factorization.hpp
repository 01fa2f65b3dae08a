#pragma once

#include "pertlab/metrics.hpp"

#include <optional>
#include <vector>

namespace pertlab {

/// Length-2 row factorization x = C1 D1 C2 D2 C3 with scalar C's and
/// diagonal D's whose entries lie in the unit ball of a designated algebra.
struct FactorizationWitness {
    Mat c1;  // 1 x W
    Mat c2;  // W x W
    Mat c3;  // W x n
    std::vector<Mat> d1;  // W ambient matrices, op norm <= 1
    std::vector<Mat> d2;
};

struct FactorizationReport {
    double residual = 0.0;  // |x - C1 D1 C2 D2 C3| in the row norm
    double k = 0.0;         // |C1| |C2| |C3|
};

/// Evaluates a witness against a 1 x n block row. A valid witness
/// (residual <= tol) certifies the length-2 norm of x is at most k.
FactorizationReport check_factorization(const Mat& x, int ambient_dim,
                                        const FactorizationWitness& w);

struct FactorSearchConfig {
    int width = 0;          // factorization width W; 0 means the row width n
    int rounds = 40;        // alternating least-squares sweeps
    int restarts = 5;       // random restarts beyond the deterministic init
    double residual_tol = 1e-9;
    std::uint64_t seed = 0;
};

struct FactorSearchResult {
    std::optional<FactorizationWitness> witness;  // empty on Failure
    double best_residual = 0.0;
    double k = 0.0;      // of the returned witness
    double ratio = 0.0;  // k / |x|
};

/// Alternating least-squares search for a length-2 witness with entries in
/// `alg`. Failure (no witness within tolerance) is a value, not an error.
FactorSearchResult search_length2(const Mat& x, const ConcreteAlgebra& alg,
                                  const FactorSearchConfig& cfg);

struct TransferResult {
    Mat y;                    // row over B, row norm <= 1
    double deviation = 0.0;   // |x - y|
    double raw_deviation = 0.0;  // |x - y'| before normalization
    double two_k_gamma = 0.0;
    bool certificate_220 = false;  // K <= 55 and |x| <= 1, so |x-y| <= 220 gamma
};

/// Replaces each diagonal entry by its unit-ball approximant in B and
/// rebuilds the row. Throws ApproximantTooFar when some entry's distance
/// bracket exceeds gamma.
TransferResult transfer_row_approximant(const Mat& x, const FactorizationWitness& w,
                                        const ConcreteAlgebra& b, double gamma,
                                        const MetricConfig& cfg);

}  // namespace pertlab
