#include <catch2/catch_amalgamated.hpp>

#include "bachflow/bracket.hpp"
#include "bachflow/derivations.hpp"
#include "bachflow/rng.hpp"

using namespace bachflow;

TEST_CASE("shape matrix with alpha = beta = 1, gamma = 0 is diag(1,1,2,3)") {
    DerivationParams d;
    d.alpha = 1.0;
    d.beta = 1.0;
    Mat4 m = d.matrix({1, 0, 1});
    CHECK(m(0, 0) == 1.0);
    CHECK(m(1, 1) == 1.0);
    CHECK(m(2, 2) == 2.0);
    CHECK(m(3, 3) == 3.0);
    CHECK(m.max_abs() == 3.0);
    CHECK(derivation_defect(m, BracketTensor::embed({1, 0, 1})) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("every shape matrix is a derivation of its bracket") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        TriBracket p{rng.uniform(0.1, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(0.1, 2.0)};
        DerivationParams d;
        d.alpha = rng.normal();
        d.beta = rng.normal();
        d.gamma = rng.normal();
        d.l21 = rng.normal();
        d.l31 = rng.normal();
        d.l41 = rng.normal();
        d.l42 = rng.normal();
        CHECK(derivation_defect(d.matrix(p), BracketTensor::embed(p)) < 1e-12);
    }
}

TEST_CASE("the derivation space of the reduced family has dimension 7") {
    CHECK(derivation_space_dimension(BracketTensor::embed({1, 0, 1})) == 7);
    CHECK(derivation_space_dimension(BracketTensor::embed({1.3, 0.7, 0.9})) == 7);
    CHECK(derivation_space_dimension(BracketTensor::embed({2.0, -1.0, 0.5})) == 7);
}

TEST_CASE("non-derivations are detected") {
    CHECK(derivation_defect(Mat4::identity(), BracketTensor::embed({1, 0, 1})) > 0.5);
    // diag(alpha, beta, alpha+beta, 2 alpha + beta) needs alpha = 0 once b != 0
    DerivationParams d;
    d.alpha = 1.0;
    Mat4 m = Mat4::diag(1, 0, 1, 2);
    CHECK(derivation_defect(m, BracketTensor::embed({1, 1, 1})) > 0.1);
}

TEST_CASE("abelian bracket admits every matrix as a derivation") {
    CHECK(derivation_space_dimension(BracketTensor::zero()) == 16);
}
