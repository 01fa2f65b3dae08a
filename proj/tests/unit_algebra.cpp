#include <doctest.h>

#include "pertlab/algebra.hpp"

using namespace pertlab;

namespace {

Mat unit(int n, int i, int j) {
    Mat e = Mat::Zero(n, n);
    e(i, j) = 1.0;
    return e;
}

}  // namespace

TEST_CASE("a single off-diagonal matrix unit generates all of M_2") {
    const auto a = ConcreteAlgebra::from_generators(2, {unit(2, 0, 1)});
    CHECK(a.dim() == 4);
    CHECK(a.closure_residual() < 1e-10);
}

TEST_CASE("factory dimensions") {
    CHECK(ConcreteAlgebra::scalars(3).dim() == 1);
    CHECK(ConcreteAlgebra::diagonal(3).dim() == 3);
    CHECK(ConcreteAlgebra::full(3).dim() == 9);
}

TEST_CASE("projection is idempotent and fixes the span") {
    const auto a = ConcreteAlgebra::diagonal(3);
    std::mt19937_64 rng(3);
    const Mat x = a.random_element(rng);
    CHECK((a.project(x) - x).norm() < 1e-12);
    const Mat y = random_gaussian(3, 3, rng);
    CHECK((a.project(a.project(y)) - a.project(y)).norm() < 1e-12);
    CHECK(a.contains(x, 1e-9));
    CHECK_FALSE(a.contains(unit(3, 0, 1), 1e-9));
}

TEST_CASE("coefficients round-trip through from_coefficients") {
    const auto a = ConcreteAlgebra::full(2);
    std::mt19937_64 rng(5);
    const Mat x = a.random_element(rng);
    CHECK((a.from_coefficients(a.coefficients(x)) - x).norm() < 1e-12);
}

TEST_CASE("span_distance separates diagonal from a rotated copy") {
    const auto a = ConcreteAlgebra::diagonal(2);
    CHECK(a.span_distance(a) < 1e-12);
    const Mat u = random_unitary_near_identity(2, 0.5, 17);
    const auto b = conjugate_algebra(a, u);
    CHECK(a.span_distance(b) > 1e-4);
    CHECK(a.span_distance(ConcreteAlgebra::full(2)) ==
          std::numeric_limits<double>::infinity());
}

TEST_CASE("conjugate_algebra requires a unitary") {
    const auto a = ConcreteAlgebra::diagonal(2);
    Mat s = Mat::Identity(2, 2);
    s(0, 0) = 2.0;
    CHECK_THROWS_AS(conjugate_algebra(a, s), NotUnitary);
}

TEST_CASE("conjugation preserves dimension and closure") {
    const auto a = ConcreteAlgebra::from_generators(2, {unit(2, 0, 1)});
    const Mat u = random_unitary_near_identity(2, 0.3, 23);
    const auto b = conjugate_algebra(a, u);
    CHECK(b.dim() == a.dim());
    CHECK(b.closure_residual() < 1e-10);
    CHECK(b.equals(a, 1e-8));  // M_2 conjugated is M_2
}

TEST_CASE("commutants of the standard algebras") {
    CHECK(commutant_basis(ConcreteAlgebra::scalars(3)).size() == 9);
    CHECK(commutant_basis(ConcreteAlgebra::full(3)).size() == 1);
    const auto comm = commutant_basis(ConcreteAlgebra::diagonal(3));
    CHECK(comm.size() == 3);
    const auto diag = ConcreteAlgebra::diagonal(3);
    for (const Mat& c : comm) CHECK(diag.contains(c, 1e-8));
}

TEST_CASE("commutant elements actually commute") {
    const auto a = ConcreteAlgebra::from_generators(4, {unit(4, 0, 1), unit(4, 1, 0)});
    for (const Mat& c : commutant_basis(a))
        for (const Mat& b : a.basis())
            CHECK(op_norm(c * b - b * c) < 1e-8);
}
