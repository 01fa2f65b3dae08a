#pragma once

#include "pertlab/basic_construction.hpp"
#include "pertlab/metrics.hpp"

#include <functional>
#include <string>

namespace pertlab {

/// Row-amplified expectation identities, sampled over unit-ball rows of A.
struct WatlemReport {
    double gamma = 0.0;                // row-distance upper bracket used
    double worst_exp_deviation = 0.0;  // sup |E^{(1,m)}(x) - x|, bound 2 gamma
    double worst_left_identity = 0.0;  // |E(x)E(x*) - E(xx*)|, bound 4 gamma
    double worst_right_identity = 0.0; // transposed version, bound 4 gamma
    bool bounds_hold = false;
};

WatlemReport check_watlem(const ConcreteAlgebra& a, const ConditionalExpectation& e_b,
                          double gamma_row_upper, const MetricConfig& cfg);

/// Convenience wrapper estimating gamma = row_distance(A, target).upper.
WatlemReport check_watlem(const ConcreteAlgebra& a, const ConcreteAlgebra& b,
                          const ConditionalExpectation& e_b, const MetricConfig& cfg);

/// Agreement between the expectation-side and GNS-side computations of the
/// multiplicativity defect, on sampled rows over D.
struct Watlem2Report {
    double max_row_discrepancy = 0.0;     // first displayed identity
    double max_matrix_discrepancy = 0.0;  // M_m version
};

Watlem2Report check_watlem2(const BasicConstruction& bc, const MetricConfig& cfg);

struct BuildTResult {
    Mat t;  // sum lambda(T^{-1/2} v_i) e_B lambda(T^{-1/2} v_i*)
    double mm_star_residual = 0.0;   // |MM* - 1| for the normalized row
    double commutant_residual = 0.0; // sup_a |t lambda(a) - lambda(a) t|
    double positivity_defect = 0.0;  // max(0, -lambda_min(t))
};

/// Throws IndexNotInvertible when sigma_min(T) is below tolerance.
BuildTResult build_t(const BasicConstruction& bc, const QuasiBasis& qb,
                     const ConcreteAlgebra& a, const Tolerances& tol = {});

struct CloseProjectionResult {
    Mat q;
    Mat w;
    double q_deviation = 0.0;    // |q - e_B|
    double wqw_residual = 0.0;   // |w q w* - e_B|
    double w_deviation = 0.0;    // |w - 1|
};

/// q = spectral projection of t above 1/2; w = polar part of
/// e_B q + (1 - e_B)(1 - q). Throws SpectralGapFail when |t - e_B| >= 1/2.
CloseProjectionResult close_projection_and_unitary(const Mat& t, const Mat& e_b,
                                                   const Tolerances& tol = {});

/// A linear map A -> ambient stored through images of A's basis.
struct HomMap {
    ConcreteAlgebra domain;
    std::vector<Mat> images;

    Mat apply(const Mat& x) const;
};

struct BuildPhiReport {
    double hom_residual = 0.0;      // sup |phi(xy) - phi(x)phi(y)|
    double adjoint_residual = 0.0;  // sup |phi(x*) - phi(x)*|
    double unital_residual = 0.0;   // |phi(1) - 1|
    double fixes_c_residual = 0.0;  // sup_c |phi(c) - c|
    double theta_residual = 0.0;    // worst least-squares residual of theta^{-1}
};

/// phi(x) = theta^{-1}(e_B w lambda(x) w* e_B), landing in B.
HomMap build_phi(const BasicConstruction& bc, const Mat& w, const ConcreteAlgebra& a,
                 const ConcreteAlgebra& c_fixed, BuildPhiReport* report = nullptr);

struct IntertwinerReport {
    double one_minus_s = 0.0;
    double sigma_min_s = 0.0;
    double conjugation_residual = 0.0;  // sup_a |phi1(a) - u phi2(a) u*|
    double commutes_with_c = 0.0;
    double one_minus_u = 0.0;
};

/// s = sum phi1(T^{-1/2} v_i) phi2(T^{-1/2} v_i*); u = polar part. Then
/// phi1(a) = u phi2(a) u* on A. Throws SingularInput when s is singular.
Mat intertwiner(const std::function<Mat(const Mat&)>& phi1,
                const std::function<Mat(const Mat&)>& phi2,
                const ConcreteAlgebra& a, const QuasiBasis& qb,
                const ConcreteAlgebra& c, IntertwinerReport* report = nullptr,
                const Tolerances& tol = {});

struct PerturbationReport {
    double gamma_kk_upper = 0.0;
    double gamma_row_upper = 0.0;
    double gamma_prime = 0.0;  // 220 * kk upper
    bool gamma_warning = false;

    double mm_star_residual = 0.0;
    double t_deviation = 0.0;
    double t_commutant_residual = 0.0;
    double projest_bound = 0.0;  // 2 gamma_row^{1/2}

    double q_deviation = 0.0;
    double q_commutant_residual = 0.0;
    double wqw_residual = 0.0;
    double w_deviation = 0.0;

    double phi_hom_residual = 0.0;
    double phi_adjoint_residual = 0.0;
    double phi_fixes_c_residual = 0.0;
    double phi_row_deviation = 0.0;  // estimated |phi - iota_A|_row
    double phi_row_bound = 0.0;      // 8 sqrt(2) g^{1/2} + 2 g, g = gamma_row
    double phi_row_at_witness = 0.0; // deviation of phi - iota on the quasi-basis row
    double gamma_intertwine = 0.0;   // max of the row estimate and witness deviation

    double s_invertibility = 0.0;
    double one_minus_s = 0.0;

    Mat u;
    double u_deviation = 0.0;
    double u_commutes_with_c = 0.0;
    double u_bound_stated = 0.0;     // 16 sqrt(110) g^{1/2} + 880 g, g = kk upper
    double u_bound_recomputed = 0.0; // 32 sqrt(110) g^{1/2} + 880 g
    bool u_bound_stated_ok = false;
    bool u_bound_recomputed_ok = false;
    bool bound_satisfied = false;
    bool bound_discrepancy = false;  // stated form failed, recomputed passed

    bool conjugation_verdict = false;
    double conjugation_residual = 0.0;

    std::string error;  // nonempty when an upstream step failed
};

/// Full run: metrics, t, (q, w), phi, intertwining unitary, conjugation
/// verdict. Errors are captured in the report instead of propagating.
PerturbationReport perturbation_pipeline(const ConcreteAlgebra& c,
                                         const ConcreteAlgebra& a,
                                         const ConcreteAlgebra& b,
                                         const ConcreteAlgebra& d,
                                         const MetricConfig& cfg,
                                         const Tolerances& tol = {});

}  // namespace pertlab
