#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bachflow/bracket.hpp"
#include "bachflow/rng.hpp"

using namespace bachflow;

namespace {
BracketTensor random_tri(Rng& rng) {
    return BracketTensor::embed({rng.uniform(0.1, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(0.1, 2.0)});
}
}  // namespace

TEST_CASE("component storage enforces antisymmetry") {
    BracketTensor mu;
    mu.set(2, 0, 3, 1.5);  // mu(e3, e1) = 1.5 e4
    CHECK(mu.comp(2, 0, 3) == 1.5);
    CHECK(mu.comp(0, 2, 3) == -1.5);
    CHECK(mu.comp(1, 1, 2) == 0.0);
    CHECK_THROWS(mu.set(1, 1, 0, 1.0));
}

TEST_CASE("jacobi defect") {
    CHECK(jacobi_defect(BracketTensor::zero()) == 0.0);
    CHECK(jacobi_defect(BracketTensor::embed({1, 0, 1})) == 0.0);

    // mu(e1,e2) = e3, mu(e3,e1) = e2 closes into a (solvable, non-nilpotent)
    // Lie algebra: the cyclic sum vanishes on every basis triple
    BracketTensor rot;
    rot.set(0, 1, 2, 1.0);
    rot.set(0, 2, 1, -1.0);
    CHECK(jacobi_defect(rot) == 0.0);
    CHECK(nilpotency_defect(rot) > 0.5);

    // a genuine violator: mu(e1,e2) = e2, mu(e2,e3) = e4
    BracketTensor bad;
    bad.set(0, 1, 1, 1.0);
    bad.set(1, 2, 3, 1.0);
    CHECK(jacobi_defect(bad) == Catch::Approx(1.0));
}

TEST_CASE("nilpotency defect") {
    CHECK(nilpotency_defect(BracketTensor::zero()) == 0.0);
    Rng rng(11);
    for (int i = 0; i < 20; ++i) CHECK(nilpotency_defect(random_tri(rng)) == 0.0);

    BracketTensor eig;  // mu(e1,e2) = e2: ad e1 has eigenvalue 1
    eig.set(0, 1, 1, 1.0);
    CHECK(nilpotency_defect(eig) > 0.5);
}

TEST_CASE("gl action basics") {
    BracketTensor mu = BracketTensor::embed({1, 0, 1});
    SECTION("identity acts trivially") {
        BracketTensor out = gl_action(Mat4::identity(), mu);
        for (int i = 0; i < BracketTensor::kSize; ++i)
            CHECK(out.raw()[i] == Catch::Approx(mu.raw()[i]).margin(1e-15));
    }
    SECTION("scaling by 2 divides structure constants by 2") {
        BracketTensor out = gl_action(2.0 * Mat4::identity(), BracketTensor::embed({1, 2, 3}));
        TriBracket p = out.tri_components();
        CHECK(p.a == Catch::Approx(0.5));
        CHECK(p.b == Catch::Approx(1.0));
        CHECK(p.c == Catch::Approx(1.5));
    }
    SECTION("diag(1,1,1,2) doubles the e4 output") {
        BracketTensor out = gl_action(Mat4::diag(1, 1, 1, 2), mu);
        CHECK(out.comp(0, 1, 2) == Catch::Approx(1.0));
        CHECK(out.comp(0, 2, 3) == Catch::Approx(2.0));
        CHECK(out.off_structure_max() == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("singular gauge is rejected") {
        CHECK_THROWS_WITH(gl_action(Mat4::zero(), mu), "non-invertible gauge");
    }
}

TEST_CASE("gl action is a left action and preserves class invariants") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        BracketTensor mu = random_tri(rng);
        Mat4 h1 = rng.random_matrix() + 3.0 * Mat4::identity();
        Mat4 h2 = rng.random_matrix() + 3.0 * Mat4::identity();
        BracketTensor lhs = gl_action(h1, gl_action(h2, mu));
        BracketTensor rhs = gl_action(h1 * h2, mu);
        double diff = 0.0;
        for (int i = 0; i < BracketTensor::kSize; ++i)
            diff = std::max(diff, std::abs(lhs.raw()[i] - rhs.raw()[i]));
        CHECK(diff < 1e-12);

        CHECK(jacobi_defect(gl_action(h1, mu)) < 1e-11);
        CHECK(nilpotency_defect(gl_action(h1, mu)) < 1e-10);
    }
}

TEST_CASE("orthogonal gauges preserve the bracket norm") {
    Rng rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        BracketTensor mu = random_tri(rng);
        Mat4 k = rng.random_orthogonal();
        CHECK(bracket_norm_sq(gl_action(k, mu)) ==
              Catch::Approx(bracket_norm_sq(mu)).margin(1e-12));
    }
}

TEST_CASE("pi is the derivative of the gl action") {
    BracketTensor mu = BracketTensor::embed({1.2, -0.4, 0.8});
    SECTION("pi(I) mu = -mu, pi(0) mu = 0") {
        BracketTensor pid = pi_rep(Mat4::identity(), mu);
        BracketTensor p0 = pi_rep(Mat4::zero(), mu);
        for (int i = 0; i < BracketTensor::kSize; ++i) {
            CHECK(pid.raw()[i] == Catch::Approx(-mu.raw()[i]).margin(1e-15));
            CHECK(p0.raw()[i] == 0.0);
        }
    }
    SECTION("diagonal action on the reduced family") {
        double l1 = 0.3, l2 = -0.7, l3 = 1.1, l4 = 0.5;
        BracketTensor out = pi_rep(Mat4::diag(l1, l2, l3, l4), BracketTensor::embed({2, 3, 5}));
        CHECK(out.comp(0, 1, 2) == Catch::Approx((l3 - l1 - l2) * 2));
        CHECK(out.comp(0, 1, 3) == Catch::Approx((l4 - l1 - l2) * 3));
        CHECK(out.comp(0, 2, 3) == Catch::Approx((l4 - l1 - l3) * 5));
    }
    SECTION("Richardson-extrapolated finite difference matches pi") {
        Rng rng(3);
        for (int trial = 0; trial < 5; ++trial) {
            Mat4 a = rng.random_matrix(0.5);
            BracketTensor pi = pi_rep(a, mu);
            auto fd = [&](double eps) {
                BracketTensor moved = gl_action(matrix_exp(eps * a), mu);
                return (1.0 / eps) * (moved - mu);
            };
            BracketTensor d1 = fd(1e-4), d2 = fd(1e-5);
            // first-order error cancels: (10 D(eps/10) - D(eps)) / 9
            double err = 0.0;
            for (int i = 0; i < BracketTensor::kSize; ++i) {
                double extrap = (10.0 * d2.raw()[i] - d1.raw()[i]) / 9.0;
                err = std::max(err, std::abs(extrap - pi.raw()[i]));
            }
            CHECK(err < 1e-8);
        }
    }
}

TEST_CASE("bracket norm convention") {
    CHECK(bracket_norm_sq(BracketTensor::zero()) == 0.0);
    CHECK(bracket_norm_sq(BracketTensor::embed({1, 2, 3})) == Catch::Approx(14.0));
    CHECK(bracket_norm_sq(BracketTensor::embed({1, 0, 1})) == Catch::Approx(2.0));
}

TEST_CASE("group multiplication") {
    BracketTensor mu = BracketTensor::embed({1, 0, 1});
    Rng rng(5);
    SECTION("zero is the identity, negation the inverse") {
        for (int trial = 0; trial < 10; ++trial) {
            Vec4 y{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
            Vec4 zy = group_multiply({0, 0, 0, 0}, y, mu);
            Vec4 yz = group_multiply(y, {0, 0, 0, 0}, mu);
            Vec4 inv = group_multiply(y, -1.0 * y, mu);
            for (int i = 0; i < 4; ++i) {
                CHECK(zy[i] == Catch::Approx(y[i]).margin(1e-14));
                CHECK(yz[i] == Catch::Approx(y[i]).margin(1e-14));
                CHECK(inv[i] == Catch::Approx(0.0).margin(1e-13));
            }
        }
    }
    SECTION("e1 * e2 expands the series exactly") {
        // mu(e1,e2)=e3, mu(e3,e2)=0, mu(e3,e1)=-e4
        Vec4 p = group_multiply(basis_vec(0), basis_vec(1), mu);
        CHECK(p[0] == Catch::Approx(1.0));
        CHECK(p[1] == Catch::Approx(1.0));
        CHECK(p[2] == Catch::Approx(0.5));
        CHECK(p[3] == Catch::Approx(1.0 / 12.0));
    }
    SECTION("associativity on random triples") {
        for (int trial = 0; trial < 100; ++trial) {
            BracketTensor m = random_tri(rng);
            Vec4 x{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
            Vec4 y{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
            Vec4 z{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
            Vec4 l = group_multiply(group_multiply(x, y, m), z, m);
            Vec4 r = group_multiply(x, group_multiply(y, z, m), m);
            for (int i = 0; i < 4; ++i) CHECK(l[i] == Catch::Approx(r[i]).margin(1e-10));
        }
    }
}

TEST_CASE("derivation defect") {
    BracketTensor mu = BracketTensor::embed({1, 0, 1});
    CHECK(derivation_defect(Mat4::zero(), mu) == 0.0);
    CHECK(derivation_defect(Mat4::diag(1, 1, 2, 3), mu) == Catch::Approx(0.0).margin(1e-15));
    CHECK(derivation_defect(Mat4::identity(), mu) > 0.9);  // I mu(e1,e2) - 2 mu(e1,e2) = -e3
}

TEST_CASE("validated nilpotent predicate") {
    CHECK(is_validated_nilpotent(BracketTensor::embed({1, 2, 3})));
    BracketTensor eig;
    eig.set(0, 1, 1, 1.0);
    CHECK_FALSE(is_validated_nilpotent(eig));
}

TEST_CASE("named constructors cover the three-algebra catalog") {
    CHECK(bracket_norm_sq(BracketTensor::abelian()) == 0.0);
    BracketTensor h = BracketTensor::heisenberg(2.0);
    CHECK(h.comp(0, 1, 2) == 2.0);
    CHECK(h.off_structure_max() == 0.0);
    CHECK(is_validated_nilpotent(h));
    BracketTensor n = BracketTensor::n4(1.0, 0.5, 2.0);
    CHECK(n.comp(0, 1, 2) == 1.0);
    CHECK(n.comp(0, 1, 3) == 0.5);
    CHECK(n.comp(0, 2, 3) == 2.0);
    CHECK(is_validated_nilpotent(n));
}
