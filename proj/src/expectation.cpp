#include "pertlab/expectation.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace pertlab {

Mat ConditionalExpectation::apply_blocks(const Mat& x, int block_rows, int block_cols) const {
    const int n = source_.ambient_dim();
    if (x.rows() != static_cast<Eigen::Index>(block_rows) * n ||
        x.cols() != static_cast<Eigen::Index>(block_cols) * n)
        throw ShapeMismatch("apply_blocks: shape mismatch");
    Mat out(x.rows(), x.cols());
    for (int i = 0; i < block_rows; ++i)
        for (int j = 0; j < block_cols; ++j)
            out.block(i * n, j * n, n, n) = apply(x.block(i * n, j * n, n, n));
    return out;
}

Mat ConditionalExpectation::matrix_rep() const {
    const int d = source_.dim();
    Mat rep(d, d);
    for (int k = 0; k < d; ++k)
        rep.col(k) = source_.coefficients(apply(source_.basis()[static_cast<std::size_t>(k)]));
    return rep;
}

ConditionalExpectation trace_expectation(const ConcreteAlgebra& d,
                                         const ConcreteAlgebra& b,
                                         const Tolerances& tol) {
    if (d.ambient_dim() != b.ambient_dim())
        throw ShapeMismatch("trace_expectation: ambient dimensions differ");
    if (!d.contains_algebra(b, tol.structural * 10))
        throw NotNested("trace_expectation: target is not contained in source");
    return ConditionalExpectation(d, b);
}

namespace {

QuasiBasis quasi_basis_from_walk(const ConditionalExpectation& e,
                                 const std::vector<Mat>& walk,
                                 const Tolerances& tol) {
    const int n = e.source().ambient_dim();
    std::vector<Mat> vs;
    for (const Mat& dk : walk) {
        // Module Gram-Schmidt step: strip the components already captured.
        Mat w = dk;
        for (const Mat& v : vs) w -= v * e.apply(v.adjoint() * dk);
        // Second sweep restores module-orthogonality lost to cancellation.
        for (const Mat& v : vs) w -= v * e.apply(v.adjoint() * w);
        Mat gram = e.apply(w.adjoint() * w);
        gram = (gram + gram.adjoint()) / 2.0;
        Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().maxCoeff() <= tol.singular) continue;
        // Support-restricted inverse square root keeps non-free directions.
        vs.push_back(w * matrix_inverse_sqrt(gram, tol.singular));
    }

    QuasiBasis qb;
    qb.elements = std::move(vs);
    qb.index_element = Mat::Zero(n, n);
    for (const Mat& v : qb.elements) qb.index_element += v * v.adjoint();
    return qb;
}

}  // namespace

QuasiBasis quasi_basis(const ConditionalExpectation& e, const Tolerances& tol) {
    const ConcreteAlgebra& d = e.source();

    // Walking D's standard basis can be arbitrarily ill-conditioned when the
    // early elements nearly align with the module generated so far (Gram
    // eigenvalues of order eps^2 for a target eps-close to a subalgebra the
    // basis is adapted to). A generic seeded rotation of the walk basis
    // avoids the alignment; retry with fresh rotations before giving up.
    double best_residual = std::numeric_limits<double>::infinity();
    QuasiBasis best;
    for (std::uint64_t attempt = 0; attempt < 4; ++attempt) {
        std::vector<Mat> walk = d.basis();
        if (attempt > 0) {
            std::mt19937_64 rng(0x9b5aULL + attempt);
            const int dim = d.dim();
            const Mat g = random_gaussian(dim, dim, rng);
            Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
            const Mat mix = svd.matrixU() * svd.matrixV().adjoint();
            for (int k = 0; k < dim; ++k) {
                Vec coeff = Vec::Zero(dim);
                for (int j = 0; j < dim; ++j) coeff(j) = mix(j, k);
                walk[static_cast<std::size_t>(k)] = d.from_coefficients(coeff);
            }
        }
        QuasiBasis qb = quasi_basis_from_walk(e, walk, tol);
        const double residual = verify_quasi_basis(e, qb).max_residual;
        if (residual < best_residual) {
            best_residual = residual;
            best = std::move(qb);
        }
        if (best_residual <= 1e-9) break;
    }
    if (best_residual > 1e-7)
        throw GramDegenerate("quasi_basis: reconstruction residual " +
                             std::to_string(best_residual));
    return best;
}

QuasiBasisReport verify_quasi_basis(const ConditionalExpectation& e, const QuasiBasis& qb) {
    const ConcreteAlgebra& d = e.source();
    QuasiBasisReport report;
    for (const Mat& x : d.basis()) {
        Mat rec = Mat::Zero(d.ambient_dim(), d.ambient_dim());
        for (const Mat& v : qb.elements) rec += v * e.apply(v.adjoint() * x);
        report.max_residual = std::max(report.max_residual, op_norm(x - rec));
        report.centrality_residual =
            std::max(report.centrality_residual,
                     op_norm(qb.index_element * x - x * qb.index_element));
    }
    Eigen::JacobiSVD<Mat> svd(qb.index_element);
    report.sigma_min_T = svd.singularValues().minCoeff();
    return report;
}

}  // namespace pertlab
