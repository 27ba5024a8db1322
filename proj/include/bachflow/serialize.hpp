#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "bachflow/bracket.hpp"
#include "bachflow/curvature.hpp"
#include "bachflow/flow.hpp"
#include "bachflow/soliton.hpp"

namespace bachflow {

using json = nlohmann::json;

/// 17 significant digits: round-trips doubles exactly and keeps output
/// byte-stable for regression diffs.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline json to_json(const TriBracket& p) { return json{{"a", p.a}, {"b", p.b}, {"c", p.c}}; }

inline TriBracket tribracket_from_json(const json& j) {
    return {j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>()};
}

/// Brackets serialize as {"entries": [[i, j, k, value], ...]} with 1-based
/// indices and i < j; omitted entries are zero.
inline json to_json(const BracketTensor& mu) {
    json entries = json::array();
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            for (int k = 0; k < 4; ++k) {
                double v = mu.comp(i, j, k);
                if (v != 0.0) entries.push_back(json::array({i + 1, j + 1, k + 1, v}));
            }
    return json{{"entries", entries}};
}

inline BracketTensor bracket_from_json(const json& j) {
    BracketTensor mu;
    for (const auto& e : j.at("entries")) {
        int i = e.at(0).get<int>(), jj = e.at(1).get<int>(), k = e.at(2).get<int>();
        if (i < 1 || i > 4 || jj < 1 || jj > 4 || k < 1 || k > 4 || i >= jj)
            throw std::invalid_argument("bracket entry indices must satisfy 1 <= i < j <= 4, 1 <= k <= 4");
        mu.set(i - 1, jj - 1, k - 1, e.at(3).get<double>());
    }
    return mu;
}

inline json to_json(const Mat4& m) {
    json rows = json::array();
    for (int i = 0; i < 4; ++i) {
        json row = json::array();
        for (int j = 0; j < 4; ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline Mat4 mat4_from_json(const json& j) {
    Mat4 m;
    for (int i = 0; i < 4; ++i)
        for (int jj = 0; jj < 4; ++jj) m(i, jj) = j.at(i).at(jj).get<double>();
    return m;
}

inline json to_json(const Tensor4& t) {
    // dense, row-major over (i, j, k, l)
    json flat = json::array();
    for (double v : t.v) flat.push_back(v);
    return flat;
}

inline json to_json(const CurvatureBundle& b) {
    json gamma = json::array();
    for (double v : b.gamma.v) gamma.push_back(v);
    return json{{"layout", "dense row-major"},
                {"gamma", gamma},
                {"riemann", to_json(b.riemann)},
                {"ricci", to_json(b.ricci)},
                {"scalar", b.scalar},
                {"weyl", to_json(b.weyl)},
                {"weyl_div2", to_json(b.weyl_div2)},
                {"bach_bilinear", to_json(b.bach_bilinear)},
                {"bach_endo", to_json(b.bach_endo)}};
}

inline json to_json(const SolitonSolution& s) {
    return json{{"a", s.a},         {"c", s.c},           {"alpha", s.alpha},
                {"beta", s.beta},   {"lambda", s.lambda}, {"residual", s.residual}};
}

inline json to_json(const CertificationReport& r) {
    json sols = json::array();
    for (const auto& s : r.solutions) sols.push_back(to_json(s));
    return json{
        {"solutions", sols},
        {"grid_stats",
         {{"region",
           {{"a_min", r.stats.region.a_min},
            {"a_max", r.stats.region.a_max},
            {"c_min", r.stats.region.c_min},
            {"c_max", r.stats.region.c_max}}},
          {"starts", r.stats.starts},
          {"converged", r.stats.converged},
          {"discarded_singular", r.stats.discarded_singular},
          {"distinct_roots", r.stats.distinct_roots},
          {"scan_resolution", r.stats.scan_resolution},
          {"min_residual_off_root", r.stats.min_residual_off_root}}},
        {"published_comparison",
         {{"alpha_published", r.alpha_published},
          {"beta_published", r.beta_published},
          {"lambda_published", r.lambda_published},
          {"lambda_derived", r.lambda_derived},
          {"lambda_matches_published", r.lambda_matches_published},
          {"note", "derived lambda follows from alpha, beta and trace-freeness; the published "
                   "lambda value is inconsistent with its own alpha, beta and is flagged"}}},
        {"classification", r.classification},
        {"classification_convention", r.classification_convention}};
}

/// Trajectory CSV.  Header is fixed; floats carry 17 significant digits.
inline void write_trajectory_csv(std::ostream& os, const FlowTrajectory& traj) {
    os << "t,a,b,c,norm2,scalar_curv,log_ac,b2_over_a2,r,lambda_scale,tau,off_structure_max\n";
    for (const FlowSample& s : traj.samples) {
        double a, b, c;
        if (traj.kind == FlowKind::full_gauged || traj.kind == FlowKind::full_ungauged) {
            BracketTensor mu;
            std::copy(s.state.begin(), s.state.end(), mu.raw().begin());
            TriBracket p = mu.tri_components();
            a = p.a; b = p.b; c = p.c;
        } else if (traj.kind == FlowKind::metric && traj.initial_bracket) {
            // structure components of the flag-preserving gauge image of the
            // fixed bracket; norm2/scalar_curv are the invariant channels
            MetricSpec ms(detail::unpack_sym(s.state));
            TriBracket p = gl_action(ms.lower_factor(), *traj.initial_bracket).tri_components();
            a = p.a; b = p.b; c = p.c;
        } else {
            a = s.state[0]; b = s.state[1]; c = s.state[2];
        }
        os << fmt17(s.t) << ',' << fmt17(a) << ',' << fmt17(b) << ',' << fmt17(c) << ','
           << fmt17(s.mon.norm2) << ',' << fmt17(s.mon.scalar) << ',' << fmt17(s.mon.log_ac) << ','
           << fmt17(s.mon.b2_over_a2) << ',' << fmt17(s.mon.r) << ',' << fmt17(s.mon.lambda_scale)
           << ',' << fmt17(s.mon.tau) << ',' << fmt17(s.mon.off_structure_max) << '\n';
    }
}

}  // namespace bachflow
