#include <doctest.h>

#include "pertlab/perturbation.hpp"

#include <cmath>

using namespace pertlab;

namespace {

struct Inclusion {
    ConcreteAlgebra c;
    ConcreteAlgebra a;
    ConcreteAlgebra b;
    ConcreteAlgebra d;
};

Inclusion perturbed_diagonal(int n, double eps, std::uint64_t seed) {
    auto c = ConcreteAlgebra::scalars(n);
    auto a = ConcreteAlgebra::diagonal(n);
    const Mat u0 = random_unitary_near_identity(n, eps, seed);
    auto b = conjugate_algebra(a, u0);
    auto d = ConcreteAlgebra::full(n);
    return {std::move(c), std::move(a), std::move(b), std::move(d)};
}

}  // namespace

TEST_CASE("watlem bounds hold for a small perturbation") {
    const Inclusion inc = perturbed_diagonal(2, 1e-3, 3);
    MetricConfig cfg;
    cfg.seed = 4;
    const auto e_b = trace_expectation(inc.d, inc.b);
    const WatlemReport rep = check_watlem(inc.a, inc.b, e_b, cfg);
    CHECK(rep.gamma < 0.05);
    CHECK(rep.bounds_hold);
    CHECK(rep.worst_exp_deviation <= 2.0 * rep.gamma + 1e-9);
}

TEST_CASE("watlem2 identities agree across the two code paths") {
    const auto d = ConcreteAlgebra::full(2);
    const auto b = ConcreteAlgebra::diagonal(2);
    const BasicConstruction bc(trace_expectation(d, b));
    MetricConfig cfg;
    cfg.seed = 5;
    const Watlem2Report rep = check_watlem2(bc, cfg);
    CHECK(rep.max_row_discrepancy < 1e-8);
    CHECK(rep.max_matrix_discrepancy < 1e-8);
}

TEST_CASE("t built from the quasi-basis is close to e_B") {
    const Inclusion inc = perturbed_diagonal(2, 1e-4, 7);
    const auto e_b = trace_expectation(inc.d, inc.b);
    const BasicConstruction bc(e_b);
    const auto e_c = trace_expectation(inc.a, inc.c);
    const QuasiBasis qb = quasi_basis(e_c);
    const BuildTResult t = build_t(bc, qb, inc.a);
    CHECK(t.mm_star_residual < 1e-8);
    CHECK(t.commutant_residual < 1e-8);
    CHECK(t.positivity_defect < 1e-10);
    CHECK(op_norm(t.t - bc.jones_projection()) < 1e-2);
}

TEST_CASE("close projection and unitary for the unperturbed inclusion") {
    const auto d = ConcreteAlgebra::full(2);
    const auto a = ConcreteAlgebra::diagonal(2);
    const BasicConstruction bc(trace_expectation(d, a));
    const auto e_c = trace_expectation(a, ConcreteAlgebra::scalars(2));
    const QuasiBasis qb = quasi_basis(e_c);
    const BuildTResult t = build_t(bc, qb, a);
    // B = A: t must equal e_B and w must be the identity.
    CHECK(op_norm(t.t - bc.jones_projection()) < 1e-8);
    const CloseProjectionResult cp =
        close_projection_and_unitary(t.t, bc.jones_projection());
    CHECK(cp.q_deviation < 1e-8);
    CHECK(cp.wqw_residual < 1e-8);
    CHECK(cp.w_deviation < 1e-7);
}

TEST_CASE("close projection rejects t without a spectral gap") {
    const auto d = ConcreteAlgebra::full(2);
    const auto b = ConcreteAlgebra::diagonal(2);
    const BasicConstruction bc(trace_expectation(d, b));
    const Mat bad = 0.5 * Mat::Identity(4, 4);
    CHECK_THROWS(close_projection_and_unitary(bad, bc.jones_projection()));
}

TEST_CASE("intertwiner conjugates one representation onto the other") {
    const Inclusion inc = perturbed_diagonal(2, 1e-3, 11);
    const auto e_c = trace_expectation(inc.a, inc.c);
    const QuasiBasis qb = quasi_basis(e_c);
    const Mat v = random_unitary_near_identity(2, 1e-3, 13);
    IntertwinerReport rep;
    const Mat u = intertwiner([&](const Mat& x) { return Mat(v * x * v.adjoint()); },
                              [](const Mat& x) { return x; }, inc.a, qb, inc.c, &rep);
    CHECK(op_norm(u * u.adjoint() - Mat::Identity(2, 2)) < 1e-10);
    CHECK(rep.conjugation_residual < 1e-8);
    CHECK(rep.one_minus_u <= 2.0 * rep.one_minus_s + 1e-9);
}

TEST_CASE("full pipeline conjugates A onto a small perturbation") {
    const Inclusion inc = perturbed_diagonal(2, 1e-4, 17);
    MetricConfig cfg;
    cfg.seed = 18;
    const PerturbationReport rep =
        perturbation_pipeline(inc.c, inc.a, inc.b, inc.d, cfg);
    REQUIRE(rep.error.empty());
    CHECK(rep.conjugation_verdict);
    CHECK(rep.conjugation_residual < 1e-8);
    CHECK(rep.phi_hom_residual < 1e-8);
    CHECK(rep.phi_fixes_c_residual < 1e-8);
    CHECK(rep.t_deviation <= rep.projest_bound + 1e-9);
    CHECK(rep.phi_row_deviation <= rep.phi_row_bound + 1e-9);
    CHECK(rep.u_deviation <= 2.0 * rep.gamma_intertwine + 1e-9);
    CHECK(rep.bound_satisfied);
    // The conjugating element is an honest unitary commuting with C.
    CHECK(op_norm(rep.u * rep.u.adjoint() - Mat::Identity(2, 2)) < 1e-10);
    CHECK(rep.u_commutes_with_c < 1e-8);
}

TEST_CASE("pipeline on identical algebras reports zero everywhere") {
    const auto c = ConcreteAlgebra::scalars(2);
    const auto a = ConcreteAlgebra::diagonal(2);
    const auto d = ConcreteAlgebra::full(2);
    MetricConfig cfg;
    cfg.seed = 21;
    const PerturbationReport rep = perturbation_pipeline(c, a, a, d, cfg);
    REQUIRE(rep.error.empty());
    CHECK(rep.conjugation_verdict);
    CHECK(rep.t_deviation < 1e-7);
    CHECK(rep.u_deviation < 1e-6);
}
