#include "pertlab/perturbation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace pertlab {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    return z ^ (z >> 27);
}

Mat random_unit_row(const ConcreteAlgebra& alg, int width, std::mt19937_64& rng) {
    const int n = alg.ambient_dim();
    Mat x(n, static_cast<Eigen::Index>(width) * n);
    for (int j = 0; j < width; ++j) x.block(0, j * n, n, n) = alg.random_element(rng);
    const double nx = op_norm(x);
    return nx > 1e-14 ? Mat(x / nx) : Mat(Mat::Zero(n, static_cast<Eigen::Index>(width) * n));
}

std::vector<Mat> normalized_quasi_row(const QuasiBasis& qb, const Tolerances& tol) {
    Eigen::JacobiSVD<Mat> svd(qb.index_element);
    if (svd.singularValues().minCoeff() <= tol.singular)
        throw IndexNotInvertible("quasi-basis index element is singular");
    const Mat t_inv_sqrt =
        matrix_inverse_sqrt((qb.index_element + qb.index_element.adjoint()) / 2.0,
                            tol.singular);
    std::vector<Mat> row;
    row.reserve(qb.elements.size());
    for (const Mat& v : qb.elements) row.push_back(t_inv_sqrt * v);
    return row;
}

}  // namespace

WatlemReport check_watlem(const ConcreteAlgebra& a, const ConditionalExpectation& e_b,
                          double gamma_row_upper, const MetricConfig& cfg) {
    const int n = a.ambient_dim();
    WatlemReport report;
    report.gamma = gamma_row_upper;
    std::mt19937_64 rng(mix(cfg.seed, 0x17));
    const int samples = std::max(8, cfg.restarts * 4);
    for (int m = 1; m <= cfg.amplification_cutoff; ++m) {
        for (int s = 0; s < samples; ++s) {
            const Mat x = random_unit_row(a, m, rng);
            const Mat ex = e_b.apply_blocks(x, 1, m);
            report.worst_exp_deviation =
                std::max(report.worst_exp_deviation, op_norm(ex - x));
            const Mat ex_star = e_b.apply_blocks(x.adjoint(), m, 1);
            report.worst_left_identity =
                std::max(report.worst_left_identity,
                         op_norm(ex * ex_star - e_b.apply(x * x.adjoint())));
            const Mat xsx = e_b.apply_blocks(x.adjoint() * x, m, m);
            report.worst_right_identity =
                std::max(report.worst_right_identity, op_norm(ex_star * ex - xsx));
        }
    }
    (void)n;
    const double slack = 1e-9;
    report.bounds_hold = report.worst_exp_deviation <= 2 * report.gamma + slack &&
                         report.worst_left_identity <= 4 * report.gamma + slack &&
                         report.worst_right_identity <= 4 * report.gamma + slack;
    return report;
}

WatlemReport check_watlem(const ConcreteAlgebra& a, const ConcreteAlgebra& b,
                          const ConditionalExpectation& e_b, const MetricConfig& cfg) {
    return check_watlem(a, e_b, row_distance(a, b, cfg).overall.upper, cfg);
}

Watlem2Report check_watlem2(const BasicConstruction& bc, const MetricConfig& cfg) {
    const ConditionalExpectation& e = bc.expectation();
    const ConcreteAlgebra& d = e.source();
    const int g = bc.gns_dim();
    const Mat eb = bc.jones_projection();
    const Mat one_minus_eb = Mat::Identity(g, g) - eb;

    Watlem2Report report;
    std::mt19937_64 rng(mix(cfg.seed, 0x29));
    const int samples = std::max(8, cfg.restarts * 4);
    for (int m = 1; m <= cfg.amplification_cutoff; ++m) {
        for (int s = 0; s < samples; ++s) {
            const Mat x = random_unit_row(d, m, rng);
            const Mat ex = e.apply_blocks(x, 1, m);
            const Mat ex_star = e.apply_blocks(x.adjoint(), m, 1);

            // Row identity: expectation side vs GNS side.
            const double lhs1 = op_norm(ex * ex_star - e.apply(x * x.adjoint()));
            const Mat lam_row = bc.lambda_blocks(x, 1, m);
            const Mat lam_col = bc.lambda_blocks(x.adjoint(), m, 1);
            const double rhs1 =
                op_norm(eb * lam_row * bc.block_diag(one_minus_eb, m) * lam_col * eb);
            report.max_row_discrepancy =
                std::max(report.max_row_discrepancy, std::abs(lhs1 - rhs1));

            // Matrix identity.
            const double lhs2 =
                op_norm(ex_star * ex - e.apply_blocks(x.adjoint() * x, m, m));
            const double rhs2 = op_norm(bc.block_diag(eb, m) * lam_col * one_minus_eb *
                                        lam_row * bc.block_diag(eb, m));
            report.max_matrix_discrepancy =
                std::max(report.max_matrix_discrepancy, std::abs(lhs2 - rhs2));
        }
    }
    return report;
}

BuildTResult build_t(const BasicConstruction& bc, const QuasiBasis& qb,
                     const ConcreteAlgebra& a, const Tolerances& tol) {
    const std::vector<Mat> row = normalized_quasi_row(qb, tol);
    const int g = bc.gns_dim();
    const int n = a.ambient_dim();
    const Mat eb = bc.jones_projection();

    BuildTResult result;
    result.t = Mat::Zero(g, g);
    Mat mm_star = Mat::Zero(n, n);
    for (const Mat& m : row) {
        result.t += bc.lambda(m) * eb * bc.lambda(m.adjoint());
        mm_star += m * m.adjoint();
    }
    result.mm_star_residual = op_norm(mm_star - Mat::Identity(n, n));
    for (const Mat& ab : a.basis()) {
        const Mat la = bc.lambda(ab);
        result.commutant_residual =
            std::max(result.commutant_residual, op_norm(result.t * la - la * result.t));
    }
    Eigen::SelfAdjointEigenSolver<Mat> es((result.t + result.t.adjoint()) / 2.0,
                                          Eigen::EigenvaluesOnly);
    result.positivity_defect = std::max(0.0, -es.eigenvalues().minCoeff());
    return result;
}

CloseProjectionResult close_projection_and_unitary(const Mat& t, const Mat& e_b,
                                                   const Tolerances& tol) {
    const double dev = op_norm(t - e_b);
    if (dev >= 0.5)
        throw SpectralGapFail("close_projection: |t - e_B| = " + std::to_string(dev) +
                              " >= 1/2");
    CloseProjectionResult out;
    out.q = spectral_projection((t + t.adjoint()) / 2.0, 0.5, tol);
    const Mat id = Mat::Identity(t.rows(), t.cols());
    const Mat z = e_b * out.q + (id - e_b) * (id - out.q);
    out.w = polar_unitary(z, tol);
    out.q_deviation = op_norm(out.q - e_b);
    out.wqw_residual = op_norm(out.w * out.q * out.w.adjoint() - e_b);
    out.w_deviation = op_norm(out.w - id);
    return out;
}

Mat HomMap::apply(const Mat& x) const {
    const Vec c = domain.coefficients(x);
    Mat out = Mat::Zero(images.front().rows(), images.front().cols());
    for (int k = 0; k < domain.dim(); ++k) out += c(k) * images[static_cast<std::size_t>(k)];
    return out;
}

HomMap build_phi(const BasicConstruction& bc, const Mat& w, const ConcreteAlgebra& a,
                 const ConcreteAlgebra& c_fixed, BuildPhiReport* report) {
    const Mat eb = bc.jones_projection();
    HomMap phi{a, {}};
    BuildPhiReport rep;
    for (const Mat& ab : a.basis()) {
        double residual = 0.0;
        const Mat image = bc.theta_inverse(
            eb * w * bc.lambda(ab) * w.adjoint() * eb, 1e-2, &residual);
        rep.theta_residual = std::max(rep.theta_residual, residual);
        phi.images.push_back(image);
    }
    for (const Mat& x : a.basis()) {
        rep.adjoint_residual = std::max(
            rep.adjoint_residual, op_norm(phi.apply(x.adjoint()) - phi.apply(x).adjoint()));
        for (const Mat& y : a.basis())
            rep.hom_residual = std::max(
                rep.hom_residual, op_norm(phi.apply(x * y) - phi.apply(x) * phi.apply(y)));
    }
    rep.unital_residual = op_norm(phi.apply(a.identity()) - a.identity());
    for (const Mat& c : c_fixed.basis())
        rep.fixes_c_residual = std::max(rep.fixes_c_residual, op_norm(phi.apply(c) - c));
    if (report) *report = rep;
    return phi;
}

Mat intertwiner(const std::function<Mat(const Mat&)>& phi1,
                const std::function<Mat(const Mat&)>& phi2,
                const ConcreteAlgebra& a, const QuasiBasis& qb,
                const ConcreteAlgebra& c, IntertwinerReport* report,
                const Tolerances& tol) {
    const std::vector<Mat> row = normalized_quasi_row(qb, tol);
    const int n = a.ambient_dim();
    Mat s = Mat::Zero(n, n);
    for (const Mat& m : row) s += phi1(m) * phi2(m.adjoint());

    IntertwinerReport rep;
    rep.one_minus_s = op_norm(Mat::Identity(n, n) - s);
    Eigen::JacobiSVD<Mat> svd(s);
    rep.sigma_min_s = svd.singularValues().minCoeff();
    const Mat u = polar_unitary(s, tol);
    rep.one_minus_u = op_norm(Mat::Identity(n, n) - u);
    for (const Mat& ab : a.basis())
        rep.conjugation_residual =
            std::max(rep.conjugation_residual,
                     op_norm(phi1(ab) - u * phi2(ab) * u.adjoint()));
    for (const Mat& cb : c.basis())
        rep.commutes_with_c = std::max(rep.commutes_with_c, op_norm(u * cb - cb * u));
    if (report) *report = rep;
    return u;
}

PerturbationReport perturbation_pipeline(const ConcreteAlgebra& c,
                                         const ConcreteAlgebra& a,
                                         const ConcreteAlgebra& b,
                                         const ConcreteAlgebra& d,
                                         const MetricConfig& cfg,
                                         const Tolerances& tol) {
    PerturbationReport report;
    try {
        const ConditionalExpectation e_b = trace_expectation(d, b, tol);
        const BasicConstruction bc(e_b);
        const ConditionalExpectation e_c = trace_expectation(a, c, tol);
        const QuasiBasis qb = quasi_basis(e_c, tol);

        const Bracket kk = kk_distance(a, b, cfg);
        const RowDistanceReport rowd = row_distance(a, b, cfg);
        report.gamma_kk_upper = kk.upper;
        report.gamma_row_upper = rowd.overall.upper;
        report.gamma_prime = 220.0 * kk.upper;
        report.gamma_warning = report.gamma_prime >= 1.0 / 2066.0;

        const BuildTResult bt = build_t(bc, qb, a, tol);
        report.mm_star_residual = bt.mm_star_residual;
        report.t_commutant_residual = bt.commutant_residual;
        report.t_deviation = op_norm(bt.t - bc.jones_projection());
        report.projest_bound = 2.0 * std::sqrt(report.gamma_row_upper);

        const CloseProjectionResult cp =
            close_projection_and_unitary(bt.t, bc.jones_projection(), tol);
        report.q_deviation = cp.q_deviation;
        report.wqw_residual = cp.wqw_residual;
        report.w_deviation = cp.w_deviation;
        for (const Mat& ab : a.basis()) {
            const Mat la = bc.lambda(ab);
            report.q_commutant_residual =
                std::max(report.q_commutant_residual, op_norm(cp.q * la - la * cp.q));
        }

        BuildPhiReport phi_rep;
        const HomMap phi = build_phi(bc, cp.w, a, c, &phi_rep);
        report.phi_hom_residual = phi_rep.hom_residual;
        report.phi_adjoint_residual = phi_rep.adjoint_residual;
        report.phi_fixes_c_residual = phi_rep.fixes_c_residual;
        const Bracket phi_row = row_norm_of_map(
            [&](const Mat& x) { return Mat(phi.apply(x) - a.project(x)); }, a,
            cfg.amplification_cutoff, cfg);
        report.phi_row_deviation = phi_row.lower;
        const double g_row = report.gamma_row_upper;
        report.phi_row_bound = 8.0 * std::sqrt(2.0) * std::sqrt(g_row) + 2.0 * g_row;

        // Deviation on the quasi-basis row itself; dominates |1 - s| in the
        // intertwining step, so 2 * gamma_intertwine is an honest budget.
        {
            const std::vector<Mat> m_row = normalized_quasi_row(qb, tol);
            const int n = a.ambient_dim();
            const int k = static_cast<int>(m_row.size());
            Mat dev_row(n, static_cast<Eigen::Index>(k) * n);
            Mat dev_col(static_cast<Eigen::Index>(k) * n, n);
            for (int i = 0; i < k; ++i) {
                const Mat& m = m_row[static_cast<std::size_t>(i)];
                dev_row.block(0, i * n, n, n) = phi.apply(m) - m;
                dev_col.block(i * n, 0, n, n) = phi.apply(m.adjoint()) - m.adjoint();
            }
            report.phi_row_at_witness = std::max(op_norm(dev_row), op_norm(dev_col));
        }
        report.gamma_intertwine =
            std::max(report.phi_row_deviation, report.phi_row_at_witness);

        IntertwinerReport int_rep;
        const Mat u = intertwiner([&](const Mat& x) { return phi.apply(x); },
                                  [](const Mat& x) { return x; }, a, qb, c, &int_rep, tol);
        report.u = u;
        report.one_minus_s = int_rep.one_minus_s;
        report.s_invertibility = int_rep.sigma_min_s;
        report.u_deviation = int_rep.one_minus_u;
        report.u_commutes_with_c = int_rep.commutes_with_c;

        const double g_kk = report.gamma_kk_upper;
        report.u_bound_stated =
            16.0 * std::sqrt(110.0) * std::sqrt(g_kk) + 880.0 * g_kk;
        report.u_bound_recomputed =
            32.0 * std::sqrt(110.0) * std::sqrt(g_kk) + 880.0 * g_kk;
        report.u_bound_stated_ok = report.u_deviation <= report.u_bound_stated + 1e-9;
        report.u_bound_recomputed_ok =
            report.u_deviation <= report.u_bound_recomputed + 1e-9;
        report.bound_satisfied = report.u_bound_stated_ok || report.u_bound_recomputed_ok;
        report.bound_discrepancy =
            !report.u_bound_stated_ok && report.u_bound_recomputed_ok;

        // phi(a) = u a u*, so u A u* = phi(A) which should fill B.
        const ConcreteAlgebra conj = conjugate_algebra(a, u, tol);
        report.conjugation_residual = conj.span_distance(b);
        report.conjugation_verdict = conj.equals(b, 1e-8);
    } catch (const std::exception& ex) {
        report.error = ex.what();
    }
    return report;
}

}  // namespace pertlab
