#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bachflow/soliton.hpp"

using namespace bachflow;

TEST_CASE("multistart search certifies the unique root") {
    CertificationReport rep = solve_soliton({0.1, 3.0, 0.1, 3.0}, 400, 42);
    REQUIRE(rep.stats.distinct_roots == 1);
    const SolitonSolution& s = rep.solutions.front();
    CHECK(std::abs(s.a - 1.0) < 1e-9);
    CHECK(std::abs(s.c - 1.0) < 1e-9);
    CHECK(std::abs(s.alpha + 7.0 / 12.0) < 1e-9);
    CHECK(std::abs(s.beta + 7.0 / 6.0) < 1e-9);
    CHECK(s.residual < 1e-12);
    CHECK(s.lambda == Catch::Approx(35.0 / 24.0).margin(1e-9));
    CHECK(rep.lambda_derived == Catch::Approx(35.0 / 24.0).margin(1e-9));
    CHECK(rep.lambda_published == Catch::Approx(-21.0 / 16.0));
    CHECK_FALSE(rep.lambda_matches_published);
    CHECK(rep.classification == "expanding");
    CHECK(rep.stats.converged > 100);
    CHECK(rep.stats.min_residual_off_root > 1e-4);
}

TEST_CASE("least-squares misfit away from the root") {
    SolitonSolution fit = best_fit_soliton(1.0, 2.0);
    CHECK(fit.residual > 1e-2);
    SolitonSolution at_root = best_fit_soliton(1.0, 1.0);
    CHECK(at_root.residual < 1e-12);
    CHECK(at_root.lambda == Catch::Approx(35.0 / 24.0));
    CHECK(at_root.alpha == Catch::Approx(-7.0 / 12.0));
    CHECK(at_root.beta == Catch::Approx(-7.0 / 6.0));
}

TEST_CASE("roots scale with the fourth power") {
    for (double k : {0.5, 2.0}) {
        SolitonSolution s;
        s.a = k;
        s.c = k;
        double k4 = k * k * k * k;
        s.alpha = -7.0 / 12.0 * k4;
        s.beta = -7.0 / 6.0 * k4;
        s.lambda = soliton_lambda(s.alpha, s.beta);
        CHECK(soliton_residual(s) < 1e-10 * k4);
    }
}

TEST_CASE("dynamic soliton criterion: ray invariance") {
    SolitonSolution s{1.0, 1.0, -7.0 / 12.0, -7.0 / 6.0, 35.0 / 24.0, 0.0};
    DynamicsReport rep = verify_soliton_dynamics(s, 50.0);
    CHECK(rep.ray_invariant);
    CHECK(rep.max_ray_deviation < 1e-8);
    CHECK(rep.max_abs_b < 1e-14);
    CHECK(rep.max_ratio_drift < 1e-8);
}

TEST_CASE("heisenberg ray evolves by scaling under the full flow") {
    BracketTensor mu0 = BracketTensor::heisenberg(1.0);
    FlowTrajectory traj = integrate_full(mu0, 20.0, {}, true);
    for (const FlowSample& s : traj.samples) {
        BracketTensor mu;
        std::copy(s.state.begin(), s.state.end(), mu.raw().begin());
        // distance from the ray spanned by mu0: only the (1,2;3) entry may move
        double k = mu.comp(0, 1, 2);
        BracketTensor dev = mu - k * mu0;
        double m = 0.0;
        for (double v : dev.raw()) m = std::max(m, std::abs(v));
        CHECK(m < 1e-9);
        CHECK(k > 0.0);
    }
}

TEST_CASE("non-solitons drift toward the symmetric ray") {
    FlowTrajectory traj = integrate_reduced({1.0, 0.0, 2.0}, 50.0, {});
    double prev = traj.samples.front().mon.log_ac;
    CHECK(prev < 0.0);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        double cur = traj.samples[i].mon.log_ac;
        CHECK(cur >= prev - 1e-12);  // log(a/c) increases monotonically toward 0
        prev = cur;
    }
    CHECK(traj.back().mon.log_ac > traj.samples.front().mon.log_ac);
}
