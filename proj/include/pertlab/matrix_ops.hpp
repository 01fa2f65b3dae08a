#pragma once

#include "pertlab/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace pertlab {

/// Operator (spectral) norm: largest singular value.
double op_norm(const Mat& m);

/// Frobenius distance is sometimes needed alongside; Eigen's .norm() covers it.

/// Hilbert-Schmidt inner product with the normalized trace, tr(x*y)/N,
/// conjugate-linear in the first argument.
Scalar hs_inner(const Mat& x, const Mat& y);

/// Unitary part of the polar decomposition, u = M (M*M)^{-1/2}.
/// Throws SingularInput when sigma_min(M) <= tol.singular.
Mat polar_unitary(const Mat& m, const Tolerances& tol = {});

/// Orthogonal projection onto the eigenspaces of a self-adjoint H with
/// eigenvalue >= threshold. Throws EigenvalueAtThreshold when the spectrum
/// is not separated from the threshold by tol.structural.
Mat spectral_projection(const Mat& h, double threshold, const Tolerances& tol = {});

/// Positive-part functional calculus helpers on self-adjoint matrices.
/// inverse_sqrt ignores eigenvalues below cutoff (support-restricted
/// pseudo-inverse square root).
Mat matrix_sqrt(const Mat& h);
Mat matrix_inverse_sqrt(const Mat& h, double cutoff);

/// u = exp(i eps H / ||H||) for a seeded random self-adjoint H.
/// ||u - 1|| <= eps; deterministic given the seed.
Mat random_unitary_near_identity(int dim, double epsilon, std::uint64_t seed);

/// Same construction with H projected onto the span of `constraint_span`
/// first (used to draw unitaries commuting with a given algebra: pass the
/// commutant's basis).
Mat random_unitary_near_identity_in_span(const std::vector<Mat>& constraint_span,
                                         int dim, double epsilon, std::uint64_t seed);

/// Seeded complex Gaussian matrix (entries (g1 + i g2)/sqrt(2)).
Mat random_gaussian(int rows, int cols, std::mt19937_64& rng);

/// Seeded random self-adjoint matrix.
Mat random_self_adjoint(int dim, std::mt19937_64& rng);

/// Top singular triple (sigma, u, v) with m v = sigma u.
struct TopSingular {
    double sigma = 0.0;
    Vec left;
    Vec right;
};
TopSingular top_singular(const Mat& m);

/// Clip singular values to at most 1 (metric projection onto the operator
/// unit ball in the Hilbert-Schmidt metric).
Mat clip_to_unit_ball(const Mat& m);

}  // namespace pertlab
