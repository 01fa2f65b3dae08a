#include "pertlab/basic_construction.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace pertlab {

BasicConstruction::BasicConstruction(ConditionalExpectation e) : e_(std::move(e)) {
    const int g = gns_dim();
    jones_ = Mat::Zero(g, g);
    for (const Mat& b : e_.target().basis()) {
        const Vec v = eta(b);
        jones_ += v * v.adjoint();
    }
    const int db = e_.target().dim();
    theta_cols_ = Mat(static_cast<Eigen::Index>(g) * g, db);
    for (int k = 0; k < db; ++k) {
        const Mat lb = lambda(e_.target().basis()[static_cast<std::size_t>(k)]) * jones_;
        theta_cols_.col(k) = Eigen::Map<const Vec>(lb.data(), lb.size());
    }
}

Mat BasicConstruction::lambda(const Mat& x) const {
    const int g = gns_dim();
    Mat out(g, g);
    for (int k = 0; k < g; ++k)
        out.col(k) = eta(x * e_.source().basis()[static_cast<std::size_t>(k)]);
    return out;
}

Mat BasicConstruction::lambda_blocks(const Mat& x, int block_rows, int block_cols) const {
    const int n = e_.source().ambient_dim();
    const int g = gns_dim();
    if (x.rows() != static_cast<Eigen::Index>(block_rows) * n ||
        x.cols() != static_cast<Eigen::Index>(block_cols) * n)
        throw ShapeMismatch("lambda_blocks: shape mismatch");
    Mat out(static_cast<Eigen::Index>(block_rows) * g,
            static_cast<Eigen::Index>(block_cols) * g);
    for (int i = 0; i < block_rows; ++i)
        for (int j = 0; j < block_cols; ++j)
            out.block(i * g, j * g, g, g) = lambda(x.block(i * n, j * n, n, n));
    return out;
}

Mat BasicConstruction::block_diag(const Mat& gop, int m) const {
    const Eigen::Index g = gop.rows();
    Mat out = Mat::Zero(g * m, g * m);
    for (int i = 0; i < m; ++i) out.block(i * g, i * g, g, g) = gop;
    return out;
}

Mat BasicConstruction::theta_inverse(const Mat& x, double residual_tol,
                                     double* residual_out) const {
    const int g = gns_dim();
    if (x.rows() != g || x.cols() != g)
        throw ShapeMismatch("theta_inverse: operator must act on the GNS space");
    const Vec rhs = Eigen::Map<const Vec>(x.data(), x.size());
    const Vec coeff = theta_cols_.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
    const Mat b = e_.target().from_coefficients(coeff);
    const double residual = op_norm(lambda(b) * jones_ - x);
    if (residual_out) *residual_out = residual;
    if (residual > residual_tol)
        throw NotInRange("theta_inverse: residual " + std::to_string(residual));
    return b;
}

CovariantReport verify_covariant(const BasicConstruction& bc) {
    CovariantReport report;
    report.min_outside_commutator = std::numeric_limits<double>::infinity();
    const ConditionalExpectation& e = bc.expectation();
    const Mat& eb = bc.jones_projection();
    const double span_tol = 1e-8;
    for (const Mat& b : e.target().basis()) {
        const Mat lb = bc.lambda(b);
        report.commute_on_b = std::max(report.commute_on_b, op_norm(lb * eb - eb * lb));
    }
    bool found_outside = false;
    for (const Mat& x : e.source().basis()) {
        const Mat lx = bc.lambda(x);
        if (!e.target().contains(x, span_tol)) {
            // The commutator must be bounded away from zero off B.
            found_outside = true;
            report.min_outside_commutator =
                std::min(report.min_outside_commutator, op_norm(lx * eb - eb * lx));
        }
        report.expectation_identity =
            std::max(report.expectation_identity,
                     op_norm(eb * lx * eb - bc.lambda(e.apply(x)) * eb));
        const Mat off = x - e.target().project(x);
        const double off_norm = op_norm(off);
        if (off_norm > span_tol) {
            const Mat lo = bc.lambda(off / off_norm);
            report.witness_commutator =
                std::max(report.witness_commutator, op_norm(lo * eb - eb * lo));
        }
    }
    if (!found_outside) report.min_outside_commutator = 0.0;

    // sigma_min of b -> lambda(b) e_B on coefficient space.
    const int db = e.target().dim();
    const int g = bc.gns_dim();
    Mat cols(static_cast<Eigen::Index>(g) * g, db);
    for (int k = 0; k < db; ++k) {
        const Mat lb = bc.lambda(e.target().basis()[static_cast<std::size_t>(k)]) * eb;
        cols.col(k) = Eigen::Map<const Vec>(lb.data(), lb.size());
    }
    Eigen::JacobiSVD<Mat> svd(cols);
    report.injectivity_margin = svd.singularValues().minCoeff();
    return report;
}

}  // namespace pertlab
