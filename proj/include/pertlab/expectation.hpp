#pragma once

#include "pertlab/algebra.hpp"

#include <vector>

namespace pertlab {

/// Trace-preserving conditional expectation from D onto a unital
/// subalgebra B: the orthogonal projection for <x,y> = tr(x*y)/N.
/// Idempotent, B-bimodular, unital, positive and faithful.
class ConditionalExpectation {
public:
    const ConcreteAlgebra& source() const { return source_; }
    const ConcreteAlgebra& target() const { return target_; }

    Mat apply(const Mat& x) const { return target_.project(x); }

    /// Entrywise application to a block matrix of m x n ambient blocks.
    Mat apply_blocks(const Mat& x, int block_rows, int block_cols) const;

    /// Matrix of the map on the coefficient space of D.
    Mat matrix_rep() const;

    friend ConditionalExpectation trace_expectation(const ConcreteAlgebra& d,
                                                    const ConcreteAlgebra& b,
                                                    const Tolerances& tol);

private:
    ConditionalExpectation(ConcreteAlgebra d, ConcreteAlgebra b)
        : source_(std::move(d)), target_(std::move(b)) {}

    ConcreteAlgebra source_;
    ConcreteAlgebra target_;
};

/// Throws NotNested when B is not contained in D.
ConditionalExpectation trace_expectation(const ConcreteAlgebra& d,
                                         const ConcreteAlgebra& b,
                                         const Tolerances& tol = {});

/// Finite family {v_i} with x = sum_i v_i E(v_i* x) for all x in D, and the
/// index element T = sum_i v_i v_i*.
struct QuasiBasis {
    std::vector<Mat> elements;
    Mat index_element;
};

/// Hilbert-module Gram-Schmidt over the target algebra, walking D's basis
/// in order. Throws GramDegenerate if the final reconstruction check fails.
QuasiBasis quasi_basis(const ConditionalExpectation& e, const Tolerances& tol = {});

struct QuasiBasisReport {
    double max_residual = 0.0;        // worst |x - sum v_i E(v_i* x)| over D's basis
    double centrality_residual = 0.0; // worst |Ta - aT| over D's basis
    double sigma_min_T = 0.0;
};

QuasiBasisReport verify_quasi_basis(const ConditionalExpectation& e, const QuasiBasis& qb);

}  // namespace pertlab
