#pragma once

#include "pertlab/matrix_ops.hpp"
#include "pertlab/types.hpp"

#include <vector>

namespace pertlab {

/// A unital *-subalgebra of M_N(C), stored through a basis that is
/// orthonormal under <x,y> = tr(x*y)/N. Immutable after construction.
class ConcreteAlgebra {
public:
    /// Smallest unital *-subalgebra containing the generators: closes the
    /// span under adjoints, then pairwise products, breadth-first,
    /// re-orthonormalizing each round until the dimension stabilizes.
    static ConcreteAlgebra from_generators(int ambient_dim,
                                           const std::vector<Mat>& generators,
                                           const Tolerances& tol = {});

    static ConcreteAlgebra scalars(int ambient_dim);
    static ConcreteAlgebra diagonal(int ambient_dim);
    static ConcreteAlgebra full(int ambient_dim);

    int ambient_dim() const { return ambient_dim_; }
    int dim() const { return static_cast<int>(basis_.size()); }
    const std::vector<Mat>& basis() const { return basis_; }
    Mat identity() const { return Mat::Identity(ambient_dim_, ambient_dim_); }

    /// Coefficients of the orthogonal projection of x onto the span.
    Vec coefficients(const Mat& x) const;
    Mat from_coefficients(const Vec& c) const;

    /// Orthogonal projection of x onto the span (normalized-trace metric;
    /// same projector as the Frobenius one).
    Mat project(const Mat& x) const;

    bool contains(const Mat& x, double tol) const;
    bool contains_algebra(const ConcreteAlgebra& sub, double tol) const;

    /// Largest residual of a basis product after projection back onto the
    /// span; small for a genuine subalgebra.
    double closure_residual() const;

    /// Principal-angle (subspace Hausdorff) distance between the two spans,
    /// +inf when the dimensions differ.
    double span_distance(const ConcreteAlgebra& other) const;
    bool equals(const ConcreteAlgebra& other, double tol) const;

    /// Random element of the span with complex Gaussian coefficients.
    Mat random_element(std::mt19937_64& rng) const;

private:
    ConcreteAlgebra(int ambient_dim, std::vector<Mat> basis)
        : ambient_dim_(ambient_dim), basis_(std::move(basis)) {}

    int ambient_dim_;
    std::vector<Mat> basis_;
};

/// B = u A u*, re-orthonormalized. Throws NotUnitary.
ConcreteAlgebra conjugate_algebra(const ConcreteAlgebra& a, const Mat& u,
                                  const Tolerances& tol = {});

/// Orthonormal basis (normalized-trace metric) of the commutant
/// {x in M_N : xc = cx for all c in A}.
std::vector<Mat> commutant_basis(const ConcreteAlgebra& a, const Tolerances& tol = {});

}  // namespace pertlab
