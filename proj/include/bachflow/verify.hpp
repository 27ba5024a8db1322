#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include "bachflow/bracket.hpp"
#include "bachflow/closed_forms.hpp"
#include "bachflow/curvature.hpp"
#include "bachflow/derivations.hpp"
#include "bachflow/rng.hpp"
#include "bachflow/serialize.hpp"
#include "bachflow/soliton.hpp"

namespace bachflow {

/// Grid comparison of the closed forms against the first-principles oracle,
/// plus the structural identities and the published-form discrepancies.
/// `all_ok` reports whether every deviation is within its pinned threshold.
inline json verification_report(std::size_t grid_n, std::uint64_t seed, bool& all_ok) {
    Rng rng(seed);
    const std::size_t npoints = grid_n * grid_n * grid_n;

    double dev_closed_oracle = 0.0;   // criterion: < 1e-8
    double dev_trace = 0.0;           // criterion: < 1e-10
    double dev_scaling = 0.0;         // criterion: < 1e-10 (relative)
    double dev_scalar = 0.0;          // criterion: < 1e-10
    double evo1_resid = 0.0;          // criterion: < 1e-12
    double evo2_slack = 0.0;          // most negative slack, >= -1e-12
    double evo3_slack = 0.0;
    double weyl_const_min = std::numeric_limits<double>::infinity();
    double weyl_const_max = -std::numeric_limits<double>::infinity();
    double diff_b4 = 0.0;             // published b4 vs trace-free b4
    double diff_ode_a = 0.0;          // published a' vs derived a'
    double alt_pattern_resid = 0.0;   // best alternative Bach assembly vs closed forms

    const MetricSpec id = MetricSpec::identity();
    for (std::size_t q = 0; q < npoints; ++q) {
        TriBracket p{2.0 * rng.uniform01(), rng.uniform(-2.0, 2.0), 2.0 * rng.uniform01()};
        BachCoefficients k = closed_form_bach(p);
        Mat4 closed = k.matrix();
        BracketTensor mu = BracketTensor::embed(p);

        CurvatureBundle bundle = curvature_bundle(mu, id);
        dev_closed_oracle = std::max(dev_closed_oracle, (bundle.bach_endo - closed).max_abs());
        dev_trace = std::max(dev_trace, std::abs(bundle.bach_endo.trace()));
        dev_trace = std::max(dev_trace, std::abs(k.trace()));
        dev_scalar = std::max(dev_scalar, std::abs(bundle.scalar - scalar_curvature(p)));

        // bracket rescaling law, relative deviation
        const double sc = 1.0 + rng.uniform01();
        Mat4 scaled = bach_oracle(sc * mu, id).endo;
        double denom = std::max(1.0, closed.max_abs() * sc * sc * sc * sc);
        dev_scaling = std::max(dev_scaling,
                               (scaled - (sc * sc * sc * sc) * bundle.bach_endo).max_abs() / denom);

        // Weyl-norm proportionality constant
        double w2 = tensor4_norm_sq(bundle.weyl, id);
        if (k.b1 > 1e-8) {
            double ratio = w2 / k.b1;
            weyl_const_min = std::min(weyl_const_min, ratio);
            weyl_const_max = std::max(weyl_const_max, ratio);
        }

        // evolution identities from the derived right-hand side
        EvolutionRates e = evolution_identities(p);
        double n2 = p.norm_sq();
        evo1_resid = std::max(evo1_resid, std::abs(e.dlog_ac - (p.c * p.c - p.a * p.a) * n2));
        evo2_slack = std::min(evo2_slack,
                              -(e.db2_over_a2) - (2.0 / 3.0) * (p.b * p.b / (p.a * p.a)) * n2 * n2);
        evo3_slack = std::min(evo3_slack, -(e.dnorm2) - n2 * n2 * n2 / 12.0);

        // published-form differences
        diff_b4 = std::max(diff_b4, std::abs(published_b4(p) - k.b4));
        TriRates derived = ode_rhs(p);
        TriRates published = published_ode_rhs(p);
        diff_ode_a = std::max(diff_ode_a, std::abs(published.da - derived.da));
        // (b', c' of both forms coincide once b4 is trace-free)

        // alternative double-divergence / Ricci-term assemblies
        BracketTensor cmu = kCanonicalBracketScale * mu;
        Tensor3 gam = levi_civita(cmu, id);
        Tensor4 rm = riemann(gam, cmu, id);
        Mat4 ric = ricci(rm, id);
        double s = scalar_curv(ric, id);
        Tensor4 w = weyl(rm, ric, s, id);
        BachTerms terms = bach_terms(w, ric, gam, id);
        Mat4 alt1 = 4.0 * (terms.div2 - terms.ric_weyl);       // opposite Ricci-term sign
        Mat4 alt2 = 4.0 * ((-1.0) * terms.div2 + terms.ric_weyl);
        alt_pattern_resid = std::max(alt_pattern_resid,
                                     std::min((alt1 - closed).max_abs(), (alt2 - closed).max_abs()));
    }

    // derivation-space dimension at a generic point
    int der_dim = derivation_space_dimension(BracketTensor::embed({1.3, 0.7, 0.9}));

    // soliton certification block (fast reduced search)
    CertificationReport cert = solve_soliton({0.1, 3.0, 0.1, 3.0}, 200, seed);
    bool soliton_ok = cert.stats.distinct_roots == 1 && !cert.solutions.empty() &&
                      cert.solutions.front().residual < 1e-12;

    const double weyl_const_var = weyl_const_max - weyl_const_min;
    all_ok = dev_closed_oracle < 1e-8 && dev_trace < 1e-10 && dev_scaling < 1e-10 &&
             dev_scalar < 1e-10 && evo1_resid < 1e-12 && evo2_slack > -1e-12 &&
             evo3_slack > -1e-12 && weyl_const_var < 1e-10 && der_dim == 7 && soliton_ok;

    return json{
        {"grid_points", npoints},
        {"seed", seed},
        {"closed_form_vs_oracle_max_dev", dev_closed_oracle},
        {"trace_max_abs", dev_trace},
        {"bracket_scaling_rel_dev", dev_scaling},
        {"scalar_identity_max_dev", dev_scalar},
        {"evolution",
         {{"identity1_max_residual", evo1_resid},
          {"inequality2_min_slack", evo2_slack},
          {"inequality3_min_slack", evo3_slack}}},
        {"weyl_norm_over_b1",
         {{"min", weyl_const_min},
          {"max", weyl_const_max},
          {"variation", weyl_const_var},
          {"note", "|W|^2 (all indices contracted, canonical normalization) = (2/3) b1"}}},
        {"derivation_space_dimension", der_dim},
        {"published_form_diffs",
         {{"b4_a2b2_term",
           {{"published", "-8 a^2 b^2 / 24"},
            {"derived", "-24 a^2 b^2 / 24"},
            {"max_abs_diff_on_grid", diff_b4},
            {"note", "published b4 makes tr B = (2/3) a^2 b^2; the trace-free form matches "
                     "the oracle and the published reduced ODE"}}},
          {"ode_a_term",
           {{"published", "24 b^2 c^4"},
            {"derived", "24 b^2 c^2"},
            {"max_abs_diff_on_grid", diff_ode_a},
            {"note", "the published degree-six term is dimensionally inconsistent; the derived "
                     "term follows from (1/2) pi(B - R) mu and restores the log(a/c) identity"}}},
          {"soliton_lambda",
           {{"published", -21.0 / 16.0},
            {"derived", 35.0 / 24.0},
            {"note", "published alpha = -7/12, beta = -7/6 verify exactly; the published lambda "
                     "is inconsistent with them under tr B = 0"}}},
          {"normalized_flow_limit",
           {{"published", "a, c -> 2 with a^2 + c^2 -> 1"},
            {"derived", "a, c -> sqrt(2), b -> 0 on the |mu| = 2 slice"},
            {"note", "only the derived limit is consistent with the conserved norm"}}}}},
        {"alternative_bach_assemblies_best_residual", alt_pattern_resid},
        {"soliton_certification", to_json(cert)},
        {"reference_bundle",
         {{"point", {{"a", 1.0}, {"b", 0.0}, {"c", 1.0}}},
          {"bundle", to_json(curvature_bundle(BracketTensor::embed({1, 0, 1}),
                                              MetricSpec::identity()))}}},
        {"all_ok", all_ok}};
}

}  // namespace bachflow
