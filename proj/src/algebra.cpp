#include "pertlab/algebra.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace pertlab {

namespace {

Vec vectorize(const Mat& m) {
    return Eigen::Map<const Vec>(m.data(), m.size());
}

Mat unvectorize(const Vec& v, int n) {
    return Eigen::Map<const Mat>(v.data(), n, n);
}

// Orthonormalize a family under <x,y> = tr(x*y)/N via an SVD of the
// vectorized stack; deterministic and rank-revealing.
std::vector<Mat> orthonormalize(const std::vector<Mat>& family, int n, double rank_tol) {
    if (family.empty()) return {};
    Mat stack(n * n, static_cast<Eigen::Index>(family.size()));
    for (std::size_t k = 0; k < family.size(); ++k)
        stack.col(static_cast<Eigen::Index>(k)) = vectorize(family[k]);
    Eigen::JacobiSVD<Mat> svd(stack, Eigen::ComputeThinU);
    const double sigma_max = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    std::vector<Mat> out;
    const double root_n = std::sqrt(static_cast<double>(n));
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        if (svd.singularValues()(i) > rank_tol * std::max(1.0, sigma_max))
            out.push_back(unvectorize(root_n * svd.matrixU().col(i), n));
    }
    return out;
}

}  // namespace

ConcreteAlgebra ConcreteAlgebra::from_generators(int ambient_dim,
                                                 const std::vector<Mat>& generators,
                                                 const Tolerances& tol) {
    for (const Mat& g : generators) {
        if (g.rows() != ambient_dim || g.cols() != ambient_dim)
            throw ShapeMismatch("from_generators: generator shape mismatch");
    }
    std::vector<Mat> family;
    family.push_back(Mat::Identity(ambient_dim, ambient_dim));
    for (const Mat& g : generators) family.push_back(g);
    for (const Mat& g : generators) family.push_back(g.adjoint());

    const double rank_tol = 1e-9;
    std::vector<Mat> basis = orthonormalize(family, ambient_dim, rank_tol);
    while (true) {
        std::vector<Mat> next = basis;
        for (const Mat& b : basis) next.push_back(b.adjoint());
        for (const Mat& b1 : basis)
            for (const Mat& b2 : basis) next.push_back(b1 * b2);
        std::vector<Mat> closed = orthonormalize(next, ambient_dim, rank_tol);
        if (closed.size() == basis.size()) {
            basis = std::move(closed);
            break;
        }
        basis = std::move(closed);
    }
    (void)tol;
    return ConcreteAlgebra(ambient_dim, std::move(basis));
}

ConcreteAlgebra ConcreteAlgebra::scalars(int ambient_dim) {
    return from_generators(ambient_dim, {});
}

ConcreteAlgebra ConcreteAlgebra::diagonal(int ambient_dim) {
    Mat d = Mat::Zero(ambient_dim, ambient_dim);
    for (int i = 0; i < ambient_dim; ++i) d(i, i) = Scalar(i + 1, 0.0);
    return from_generators(ambient_dim, {d});
}

ConcreteAlgebra ConcreteAlgebra::full(int ambient_dim) {
    std::vector<Mat> gens;
    for (int i = 0; i + 1 < ambient_dim; ++i) {
        Mat e = Mat::Zero(ambient_dim, ambient_dim);
        e(i, i + 1) = 1.0;
        gens.push_back(e);
    }
    if (ambient_dim == 1) return scalars(1);
    return from_generators(ambient_dim, gens);
}

Vec ConcreteAlgebra::coefficients(const Mat& x) const {
    Vec c(dim());
    for (int k = 0; k < dim(); ++k) c(k) = hs_inner(basis_[static_cast<std::size_t>(k)], x);
    return c;
}

Mat ConcreteAlgebra::from_coefficients(const Vec& c) const {
    Mat out = Mat::Zero(ambient_dim_, ambient_dim_);
    for (int k = 0; k < dim(); ++k) out += c(k) * basis_[static_cast<std::size_t>(k)];
    return out;
}

Mat ConcreteAlgebra::project(const Mat& x) const {
    return from_coefficients(coefficients(x));
}

bool ConcreteAlgebra::contains(const Mat& x, double tol) const {
    return op_norm(x - project(x)) <= tol * std::max(1.0, op_norm(x));
}

bool ConcreteAlgebra::contains_algebra(const ConcreteAlgebra& sub, double tol) const {
    for (const Mat& b : sub.basis_)
        if (!contains(b, tol)) return false;
    return true;
}

double ConcreteAlgebra::closure_residual() const {
    double worst = 0.0;
    for (const Mat& b1 : basis_)
        for (const Mat& b2 : basis_) {
            const Mat p = b1 * b2;
            worst = std::max(worst, op_norm(p - project(p)));
        }
    return worst;
}

double ConcreteAlgebra::span_distance(const ConcreteAlgebra& other) const {
    if (ambient_dim_ != other.ambient_dim_)
        throw ShapeMismatch("span_distance: different ambient dimensions");
    if (dim() != other.dim()) return std::numeric_limits<double>::infinity();
    const int nn = ambient_dim_ * ambient_dim_;
    Mat pa = Mat::Zero(nn, nn), pb = Mat::Zero(nn, nn);
    for (const Mat& b : basis_) {
        const Vec v = vectorize(b) / std::sqrt(static_cast<double>(ambient_dim_));
        pa += v * v.adjoint();
    }
    for (const Mat& b : other.basis_) {
        const Vec v = vectorize(b) / std::sqrt(static_cast<double>(ambient_dim_));
        pb += v * v.adjoint();
    }
    return op_norm(pa - pb);
}

bool ConcreteAlgebra::equals(const ConcreteAlgebra& other, double tol) const {
    return dim() == other.dim() && span_distance(other) <= tol;
}

Mat ConcreteAlgebra::random_element(std::mt19937_64& rng) const {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec c(dim());
    for (int k = 0; k < dim(); ++k) c(k) = Scalar(g(rng), g(rng)) / std::sqrt(2.0);
    return from_coefficients(c);
}

ConcreteAlgebra conjugate_algebra(const ConcreteAlgebra& a, const Mat& u,
                                  const Tolerances& tol) {
    const int n = a.ambient_dim();
    if (u.rows() != n || u.cols() != n)
        throw ShapeMismatch("conjugate_algebra: unitary shape mismatch");
    if (op_norm(u * u.adjoint() - Mat::Identity(n, n)) > 1e-8)
        throw NotUnitary("conjugate_algebra: u is not unitary");
    std::vector<Mat> gens;
    gens.reserve(a.basis().size());
    for (const Mat& b : a.basis()) gens.push_back(u * b * u.adjoint());
    return ConcreteAlgebra::from_generators(n, gens, tol);
}

std::vector<Mat> commutant_basis(const ConcreteAlgebra& a, const Tolerances& tol) {
    const int n = a.ambient_dim();
    const int nn = n * n;
    const int d = a.dim();
    // vec(cX - Xc) = (I (x) c - c^T (x) I) vec(X), column-major vec.
    Mat k(static_cast<Eigen::Index>(d) * nn, nn);
    for (int j = 0; j < d; ++j) {
        const Mat& c = a.basis()[static_cast<std::size_t>(j)];
        Mat block = Mat::Zero(nn, nn);
        const Mat id = Mat::Identity(n, n);
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                block.block(p * n, q * n, n, n) = id(q, p) * c - c.transpose()(p, q) * id;
        k.block(static_cast<Eigen::Index>(j) * nn, 0, nn, nn) = block;
    }
    Eigen::JacobiSVD<Mat> svd(k, Eigen::ComputeFullV);
    std::vector<Mat> out;
    const double cutoff = 1e-8;
    const double root_n = std::sqrt(static_cast<double>(n));
    for (int i = 0; i < nn; ++i) {
        const double s = i < svd.singularValues().size() ? svd.singularValues()(i) : 0.0;
        if (s < cutoff)
            out.push_back(Eigen::Map<const Mat>(Vec(root_n * svd.matrixV().col(i)).data(), n, n));
    }
    (void)tol;
    return out;
}

}  // namespace pertlab
