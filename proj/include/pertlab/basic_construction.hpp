#pragma once

#include "pertlab/expectation.hpp"

namespace pertlab {

/// The GNS space of D under the normalized trace, with the left regular
/// representation and the projection implementing E_B. gns_dim = dim(D) as
/// a vector space; eta maps D onto coefficient vectors in D's orthonormal
/// basis, so the GNS inner product is the standard one.
class BasicConstruction {
public:
    explicit BasicConstruction(ConditionalExpectation e);

    const ConditionalExpectation& expectation() const { return e_; }
    int gns_dim() const { return e_.source().dim(); }

    Vec eta(const Mat& x) const { return e_.source().coefficients(x); }
    Mat eta_inverse(const Vec& v) const { return e_.source().from_coefficients(v); }

    /// Matrix of left multiplication by x on the GNS space.
    Mat lambda(const Mat& x) const;

    const Mat& jones_projection() const { return jones_; }

    /// Row/column/block amplifications of lambda: entries of x are ambient
    /// N x N blocks, the result has gns_dim x gns_dim blocks.
    Mat lambda_blocks(const Mat& x, int block_rows, int block_cols) const;

    /// m-fold block diagonal of a GNS operator.
    Mat block_diag(const Mat& g, int m) const;

    /// Least-squares inversion of b -> lambda(b) e_B on the coefficient
    /// space of B. Throws NotInRange when the residual exceeds
    /// residual_tol.
    Mat theta_inverse(const Mat& x, double residual_tol = 1e-6,
                      double* residual_out = nullptr) const;

private:
    ConditionalExpectation e_;
    Mat jones_;
    // Precomputed lambda(b_k) e_B for B's basis, vectorized, for theta_inverse.
    Mat theta_cols_;
};

struct CovariantReport {
    double commute_on_b = 0.0;       // sup_b |lambda(b) e - e lambda(b)|
    double min_outside_commutator = 0.0;  // min over basis x of D outside span(B)
    double witness_commutator = 0.0;      // best commutator over normalized (1-P_B)x
    double expectation_identity = 0.0;    // sup_x |e lambda(x) e - lambda(E(x)) e|
    double injectivity_margin = 0.0;      // sigma_min of b -> lambda(b) e
};

CovariantReport verify_covariant(const BasicConstruction& bc);

}  // namespace pertlab
