#include "pertlab/matrix_ops.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace pertlab {

double op_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    // Gram route on the smaller side; cheaper than a full SVD.
    if (m.rows() <= m.cols()) {
        Eigen::SelfAdjointEigenSolver<Mat> es(m * m.adjoint(), Eigen::EigenvaluesOnly);
        return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

Scalar hs_inner(const Mat& x, const Mat& y) {
    return (x.adjoint() * y).trace() / static_cast<double>(x.rows());
}

Mat polar_unitary(const Mat& m, const Tolerances& tol) {
    if (m.rows() != m.cols())
        throw ShapeMismatch("polar_unitary: matrix must be square");
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double sigma_min = svd.singularValues().minCoeff();
    if (sigma_min <= tol.singular)
        throw SingularInput("polar_unitary: sigma_min = " + std::to_string(sigma_min));
    return svd.matrixU() * svd.matrixV().adjoint();
}

Mat spectral_projection(const Mat& h, double threshold, const Tolerances& tol) {
    const double sa_dev = op_norm(h - h.adjoint());
    if (sa_dev > 1e-7)
        throw ShapeMismatch("spectral_projection: input not self-adjoint, dev = " +
                            std::to_string(sa_dev));
    Eigen::SelfAdjointEigenSolver<Mat> es((h + h.adjoint()) / 2.0);
    const RealVec& ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i) - threshold) <= tol.structural)
            throw EigenvalueAtThreshold("spectral_projection: eigenvalue " +
                                        std::to_string(ev(i)) + " at threshold " +
                                        std::to_string(threshold));
    }
    Mat proj = Mat::Zero(h.rows(), h.cols());
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) >= threshold) {
            const Vec v = es.eigenvectors().col(i);
            proj += v * v.adjoint();
        }
    }
    return proj;
}

Mat matrix_sqrt(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es((h + h.adjoint()) / 2.0);
    RealVec d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

Mat matrix_inverse_sqrt(const Mat& h, double cutoff) {
    Eigen::SelfAdjointEigenSolver<Mat> es((h + h.adjoint()) / 2.0);
    RealVec d = es.eigenvalues();
    for (int i = 0; i < d.size(); ++i)
        d(i) = d(i) > cutoff ? 1.0 / std::sqrt(d(i)) : 0.0;
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

Mat random_gaussian(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            m(i, j) = Scalar(g(rng), g(rng)) / std::sqrt(2.0);
    return m;
}

Mat random_self_adjoint(int dim, std::mt19937_64& rng) {
    Mat g = random_gaussian(dim, dim, rng);
    return (g + g.adjoint()) / 2.0;
}

static Mat unitary_from_direction(const Mat& h, double epsilon) {
    const double nh = op_norm(h);
    const int dim = static_cast<int>(h.rows());
    if (nh == 0.0 || epsilon == 0.0) return Mat::Identity(dim, dim);
    Eigen::SelfAdjointEigenSolver<Mat> es((h + h.adjoint()) / 2.0);
    Vec phases(dim);
    for (int i = 0; i < dim; ++i)
        phases(i) = std::exp(Scalar(0.0, epsilon * es.eigenvalues()(i) / nh));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Mat random_unitary_near_identity(int dim, double epsilon, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return unitary_from_direction(random_self_adjoint(dim, rng), epsilon);
}

Mat random_unitary_near_identity_in_span(const std::vector<Mat>& constraint_span,
                                         int dim, double epsilon, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Mat h = random_self_adjoint(dim, rng);
    // Project onto the span (assumed *-closed, so the projection of a
    // self-adjoint matrix stays self-adjoint up to roundoff).
    Mat p = Mat::Zero(dim, dim);
    for (const Mat& b : constraint_span) {
        const Scalar nb = hs_inner(b, b);
        if (std::abs(nb) < 1e-14) continue;
        p += b * (hs_inner(b, h) / nb);
    }
    p = (p + p.adjoint()) / 2.0;
    return unitary_from_direction(p, epsilon);
}

TopSingular top_singular(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    TopSingular t;
    t.sigma = svd.singularValues()(0);
    t.left = svd.matrixU().col(0);
    t.right = svd.matrixV().col(0);
    return t;
}

Mat clip_to_unit_ball(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    RealVec s = svd.singularValues().cwiseMin(1.0);
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().adjoint();
}

}  // namespace pertlab
