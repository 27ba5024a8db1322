#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bachflow/bracket.hpp"
#include "bachflow/closed_forms.hpp"
#include "bachflow/curvature.hpp"
#include "bachflow/rng.hpp"

using namespace bachflow;

namespace {

TriBracket random_point(Rng& rng) {
    return {rng.uniform(0.1, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(0.1, 2.0)};
}

Vec4 nabla(const Tensor3& gamma, int m, int i) {
    return {gamma(m, i, 0), gamma(m, i, 1), gamma(m, i, 2), gamma(m, i, 3)};
}

}  // namespace

TEST_CASE("metric validation") {
    CHECK_NOTHROW(MetricSpec(Mat4::identity()));
    Mat4 bad = Mat4::identity();
    bad(0, 1) = 0.5;  // not symmetric
    CHECK_THROWS_AS(MetricSpec(bad), std::invalid_argument);
    CHECK_THROWS_AS(MetricSpec(Mat4::diag(1, 1, 1, -1)), std::invalid_argument);
}

TEST_CASE("levi-civita on the flat abelian group") {
    Tensor3 g = levi_civita(BracketTensor::zero(), MetricSpec::identity());
    for (double v : g.v) CHECK(v == 0.0);
}

TEST_CASE("levi-civita koszul values on the standard bracket") {
    Tensor3 g = levi_civita(BracketTensor::embed({1, 0, 1}), MetricSpec::identity());
    // nabla_{e1} e2 = (1/2) e3
    CHECK(g(0, 1, 2) == Catch::Approx(0.5));
    CHECK(g(0, 1, 0) == 0.0);
    CHECK(g(0, 1, 1) == 0.0);
    CHECK(g(0, 1, 3) == 0.0);
    // nabla_{e2} e2 = 0
    for (int q = 0; q < 4; ++q) CHECK(g(1, 1, q) == 0.0);
}

TEST_CASE("levi-civita is torsion-free and metric") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        BracketTensor mu = BracketTensor::embed(random_point(rng));
        MetricSpec g(rng.random_spd());
        Tensor3 gamma = levi_civita(mu, g);
        // torsion: nabla_X Y - nabla_Y X = mu(X, Y) on basis pairs
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                Vec4 d = nabla(gamma, i, j) - nabla(gamma, j, i) -
                         mu.eval(basis_vec(i), basis_vec(j));
                CHECK(norm(d) < 1e-12);
            }
        // metric compatibility: nabla g = 0
        Tensor3 dgram = covariant_derivative(g.gram, gamma);
        double m = 0.0;
        for (double v : dgram.v) m = std::max(m, std::abs(v));
        CHECK(m < 1e-12);
    }
}

TEST_CASE("riemann symmetries and first bianchi") {
    Rng rng(32);
    for (int trial = 0; trial < 8; ++trial) {
        BracketTensor mu = BracketTensor::embed(random_point(rng));
        MetricSpec g(rng.random_spd());
        Tensor3 gamma = levi_civita(mu, g);
        Tensor4 rm = riemann(gamma, mu, g);
        double worst = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k)
                    for (int l = 0; l < 4; ++l) {
                        worst = std::max(worst, std::abs(rm(i, j, k, l) + rm(j, i, k, l)));
                        worst = std::max(worst, std::abs(rm(i, j, k, l) + rm(i, j, l, k)));
                        worst = std::max(worst, std::abs(rm(i, j, k, l) - rm(k, l, i, j)));
                        worst = std::max(worst, std::abs(rm(i, j, k, l) + rm(j, k, i, l) +
                                                         rm(k, i, j, l)));
                    }
        CHECK(worst < 1e-10);
    }
    SECTION("zero bracket is flat") {
        Tensor3 gamma = levi_civita(BracketTensor::zero(), MetricSpec::identity());
        Tensor4 rm = riemann(gamma, BracketTensor::zero(), MetricSpec::identity());
        CHECK(rm.max_abs() == 0.0);
    }
}

TEST_CASE("bundle scalar curvature matches the reduced identity") {
    MetricSpec id = MetricSpec::identity();
    CHECK(curvature_bundle(BracketTensor::embed({1, 0, 1}), id).scalar ==
          Catch::Approx(-0.5).margin(1e-12));
    CHECK(curvature_bundle(BracketTensor::embed({2, 0, 0}), id).scalar ==
          Catch::Approx(-1.0).margin(1e-12));
    Rng rng(33);
    for (int trial = 0; trial < 10; ++trial) {
        TriBracket p = random_point(rng);
        CHECK(curvature_bundle(BracketTensor::embed(p), id).scalar ==
              Catch::Approx(-p.norm_sq() / 4.0).margin(1e-10));
    }
}

TEST_CASE("weyl tensor is totally trace-free") {
    Rng rng(34);
    for (int trial = 0; trial < 6; ++trial) {
        BracketTensor mu = BracketTensor::embed(random_point(rng));
        MetricSpec g(rng.random_spd());
        CurvatureBundle b = curvature_bundle(mu, g);
        Mat4 gi = inverse(g.gram);
        double worst = 0.0;
        // contract every index pair with the inverse metric
        for (int s1 = 0; s1 < 4; ++s1)
            for (int s2 = s1 + 1; s2 < 4; ++s2)
                for (int f1 = 0; f1 < 4; ++f1)
                    for (int f2 = 0; f2 < 4; ++f2) {
                        double tr = 0.0;
                        for (int p = 0; p < 4; ++p)
                            for (int q = 0; q < 4; ++q) {
                                int idx[4];
                                int free_slot = 0;
                                int frees[2] = {f1, f2};
                                for (int s = 0; s < 4; ++s) {
                                    if (s == s1) idx[s] = p;
                                    else if (s == s2) idx[s] = q;
                                    else idx[s] = frees[free_slot++];
                                }
                                tr += gi(p, q) * b.weyl(idx[0], idx[1], idx[2], idx[3]);
                            }
                        worst = std::max(worst, std::abs(tr));
                    }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("constant-curvature tensors are conformally flat") {
    MetricSpec g = MetricSpec::identity();
    const double K = 1.7;
    Tensor4 rm;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l)
                    rm(i, j, k, l) = K * (g.gram(j, k) * g.gram(i, l) - g.gram(i, k) * g.gram(j, l));
    Mat4 ric = ricci(rm, g);
    CHECK(ric(0, 0) == Catch::Approx(3.0 * K));
    double s = scalar_curv(ric, g);
    CHECK(s == Catch::Approx(12.0 * K));
    Tensor4 w = weyl(rm, ric, s, g);
    CHECK(w.max_abs() < 1e-12);
}

TEST_CASE("weyl norm is proportional to the first closed-form coefficient") {
    // calibrated constant: |W|^2 = (2/3) b1 at the canonical normalization
    Rng rng(35);
    MetricSpec id = MetricSpec::identity();
    for (int trial = 0; trial < 10; ++trial) {
        TriBracket p = random_point(rng);
        CurvatureBundle b = curvature_bundle(BracketTensor::embed(p), id);
        double w2 = tensor4_norm_sq(b.weyl, id);
        double b1 = closed_form_bach(p).b1;
        CHECK(w2 == Catch::Approx((2.0 / 3.0) * b1).epsilon(1e-12));
    }
    CHECK(tensor4_norm_sq(curvature_bundle(BracketTensor::embed({1, 0, 1}), id).weyl, id) ==
          Catch::Approx(7.0 / 12.0).margin(1e-12));
}

TEST_CASE("weyl is not parallel on the standard bracket") {
    CurvatureBundle b = curvature_bundle(BracketTensor::embed({1, 0, 1}), MetricSpec::identity());
    Tensor5 dw = covariant_derivative(b.weyl, b.gamma);
    CHECK(dw.max_abs() > 0.1);
}

TEST_CASE("scalar curvature has vanishing differential") {
    CurvatureBundle b = curvature_bundle(BracketTensor::embed({1, 0, 1}), MetricSpec::identity());
    Vec4 ds = covariant_derivative(b.scalar, b.gamma);
    CHECK(norm(ds) == 0.0);
}

TEST_CASE("bach oracle frozen values") {
    MetricSpec id = MetricSpec::identity();
    SECTION("flat bracket") {
        CHECK(bach_oracle(BracketTensor::zero(), id).bilinear.max_abs() == 0.0);
    }
    SECTION("a = c = 1, b = 0") {
        Mat4 b = bach_oracle(BracketTensor::embed({1, 0, 1}), id).endo;
        CHECK(b(0, 0) == Catch::Approx(7.0 / 8.0).margin(1e-12));
        CHECK(b(1, 1) == Catch::Approx(7.0 / 24.0).margin(1e-12));
        CHECK(b(2, 2) == Catch::Approx(-7.0 / 24.0).margin(1e-12));
        CHECK(b(3, 3) == Catch::Approx(-7.0 / 8.0).margin(1e-12));
        CHECK((b - b.transposed()).max_abs() < 1e-13);
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) CHECK(std::abs(b(i, j)) < 1e-13);
    }
    SECTION("a = b = c = 1") {
        Mat4 b = bach_oracle(BracketTensor::embed({1, 1, 1}), id).endo;
        CHECK(b(0, 0) == Catch::Approx(27.0 / 8.0).margin(1e-12));
        CHECK(b(1, 1) == Catch::Approx(51.0 / 24.0).margin(1e-12));
        CHECK(b(2, 2) == Catch::Approx(-27.0 / 24.0).margin(1e-12));
        CHECK(b(3, 3) == Catch::Approx(-105.0 / 24.0).margin(1e-12));
        CHECK(b(1, 2) == Catch::Approx(2.0).margin(1e-12));
        CHECK(b(2, 3) == Catch::Approx(-2.0).margin(1e-12));
        CHECK(std::abs(b(0, 1)) + std::abs(b(0, 2)) + std::abs(b(0, 3)) + std::abs(b(1, 3)) <
              1e-12);
    }
}

TEST_CASE("bach oracle structural properties") {
    Rng rng(36);
    MetricSpec id = MetricSpec::identity();

    SECTION("trace-free for random brackets and metrics") {
        for (int trial = 0; trial < 200; ++trial) {
            BracketTensor mu = BracketTensor::embed(random_point(rng));
            MetricSpec g(rng.random_spd());
            Mat4 endo = bach_oracle(mu, g).endo;
            CHECK(std::abs(endo.trace()) < 1e-10);
        }
    }
    SECTION("conformal scaling of the bilinear form") {
        for (int trial = 0; trial < 10; ++trial) {
            BracketTensor mu = BracketTensor::embed(random_point(rng));
            Mat4 g0 = rng.random_spd();
            double rho = rng.uniform(0.5, 3.0);
            Mat4 b0 = bach_oracle(mu, MetricSpec(g0)).bilinear;
            Mat4 b1 = bach_oracle(mu, MetricSpec(rho * g0)).bilinear;
            double denom = std::max(1.0, b0.max_abs());
            CHECK((b1 - (1.0 / rho) * b0).max_abs() / denom < 1e-10);
        }
    }
    SECTION("bracket rescaling law B_{c mu} = c^4 B_mu") {
        for (int trial = 0; trial < 10; ++trial) {
            BracketTensor mu = BracketTensor::embed(random_point(rng));
            double c = rng.uniform(0.5, 2.0);
            Mat4 b0 = bach_oracle(mu, MetricSpec::identity()).endo;
            Mat4 b1 = bach_oracle(c * mu, MetricSpec::identity()).endo;
            double c4 = c * c * c * c;
            CHECK((b1 - c4 * b0).max_abs() / std::max(1.0, c4 * b0.max_abs()) < 1e-10);
        }
    }
    SECTION("orthogonal equivariance") {
        for (int trial = 0; trial < 10; ++trial) {
            BracketTensor mu = BracketTensor::embed(random_point(rng));
            Mat4 k = rng.random_orthogonal();
            Mat4 lhs = bach_oracle(gl_action(k, mu), id).endo;
            Mat4 rhs = k * bach_oracle(mu, id).endo * k.transposed();
            CHECK((lhs - rhs).max_abs() < 1e-9);
        }
    }
    SECTION("isometry invariance of scalar invariants") {
        for (int trial = 0; trial < 8; ++trial) {
            BracketTensor mu = BracketTensor::embed(random_point(rng));
            Mat4 h = rng.random_matrix() + 3.0 * Mat4::identity();
            CurvatureBundle left = curvature_bundle(mu, MetricSpec(h.transposed() * h));
            CurvatureBundle right = curvature_bundle(gl_action(h, mu), id);
            CHECK(left.scalar == Catch::Approx(right.scalar).margin(1e-9));
            double nl = (left.bach_endo * left.bach_endo).trace();
            double nr = (right.bach_endo * right.bach_endo).trace();
            CHECK(std::sqrt(std::abs(nl)) == Catch::Approx(std::sqrt(std::abs(nr))).margin(1e-9));
        }
    }
    SECTION("divergence-free") {
        for (int trial = 0; trial < 6; ++trial) {
            BracketTensor mu = BracketTensor::embed(random_point(rng));
            MetricSpec g(rng.random_spd());
            CurvatureBundle b = curvature_bundle(mu, g);
            Tensor3 db = covariant_derivative(b.bach_bilinear, b.gamma);
            Mat4 gi = inverse(g.gram);
            for (int j = 0; j < 4; ++j) {
                double div = 0.0;
                for (int m = 0; m < 4; ++m)
                    for (int i = 0; i < 4; ++i) div += gi(m, i) * db(m, i, j);
                CHECK(std::abs(div) < 1e-10);
            }
        }
    }
}
