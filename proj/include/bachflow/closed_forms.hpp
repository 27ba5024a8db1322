#pragma once

#include <cmath>
#include <stdexcept>

#include "bachflow/bracket.hpp"
#include "bachflow/linalg.hpp"

namespace bachflow {

/// The six independent entries of the Bach operator on the reduced family:
/// diagonal b1..b4, off-diagonal couplings b5 at (2,3) and b6 at (3,4).
struct BachCoefficients {
    double b1, b2, b3, b4, b5, b6;

    Mat4 matrix() const {
        Mat4 m;
        m(0, 0) = b1;
        m(1, 1) = b2;
        m(2, 2) = b3;
        m(3, 3) = b4;
        m(1, 2) = m(2, 1) = b5;
        m(2, 3) = m(3, 2) = b6;
        return m;
    }
    double trace() const { return b1 + b2 + b3 + b4; }
};

/// Closed-form Bach operator of mu_{a,b,c} with the standard inner product.
///
/// The a^2 b^2 coefficient of b4 is -1 (not -1/3): that value is forced by
/// trace-freeness together with b1..b3, and the curvature oracle confirms it.
/// verify() reports the difference against the alternative published form.
inline BachCoefficients closed_form_bach(const TriBracket& p) {
    const double a2 = p.a * p.a, b2 = p.b * p.b, c2 = p.c * p.c;
    const double a4 = a2 * a2, b4 = b2 * b2, c4 = c2 * c2;
    BachCoefficients k{};
    k.b1 = (4.0 * a4 + 8.0 * a2 * b2 - a2 * c2 + 4.0 * b4 + 8.0 * b2 * c2 + 4.0 * c4) / 8.0;
    k.b2 = (12.0 * a4 + 24.0 * a2 * b2 - a2 * c2 + 12.0 * b4 + 8.0 * b2 * c2 - 4.0 * c4) / 24.0;
    k.b3 = -(20.0 * a4 + 24.0 * a2 * b2 - a2 * c2 + 4.0 * b4 - 8.0 * b2 * c2 - 12.0 * c4) / 24.0;
    k.b4 = (-4.0 * a4 - 24.0 * a2 * b2 + 3.0 * a2 * c2 - 20.0 * (b2 + c2) * (b2 + c2)) / 24.0;
    k.b5 = (2.0 / 3.0) * p.b * p.c * (a2 + b2 + c2);
    k.b6 = -(2.0 / 3.0) * p.a * p.b * (a2 + b2 + c2);
    return k;
}

/// Published variant of b4 with a -1/3 a^2 b^2 coefficient; kept only so the
/// verification report can quantify the difference (it breaks trace-freeness
/// by (2/3) a^2 b^2).
inline double published_b4(const TriBracket& p) {
    const double a2 = p.a * p.a, b2 = p.b * p.b, c2 = p.c * p.c;
    return (-4.0 * a2 * a2 - 8.0 * a2 * b2 + 3.0 * a2 * c2 - 20.0 * (b2 + c2) * (b2 + c2)) / 24.0;
}

/// Skew gauge term: cancels the upper-triangular part of the Bach operator so
/// the gauged generator is lower triangular and the reduced slice is preserved.
struct GaugeSkew {
    double b5, b6;

    Mat4 matrix() const {
        Mat4 r;
        r(1, 2) = b5;
        r(2, 1) = -b5;
        r(2, 3) = b6;
        r(3, 2) = -b6;
        return r;
    }
};

inline GaugeSkew gauge(const TriBracket& p) {
    BachCoefficients k = closed_form_bach(p);
    return {k.b5, k.b6};
}

struct TriRates {
    double da, db, dc;
};

/// Right-hand side of the reduced gauged flow: the structure components of
/// (1/2) pi(B - R) mu, with B from the closed forms.
inline TriRates ode_rhs(const TriBracket& p) {
    BachCoefficients k = closed_form_bach(p);
    Mat4 l = k.matrix() - gauge(p).matrix();
    BracketTensor rate = 0.5 * pi_rep(l, BracketTensor::embed(p));
    return {rate.comp(0, 1, 2), rate.comp(0, 1, 3), rate.comp(0, 2, 3)};
}

/// Published form of the reduced ODE, kept for the verification report: its
/// a' carries a degree-six 24 b^2 c^4 term where the derivation gives 24 b^2 c^2.
inline TriRates published_ode_rhs(const TriBracket& p) {
    const double a2 = p.a * p.a, b2 = p.b * p.b, c2 = p.c * p.c;
    const double a4 = a2 * a2, b4 = b2 * b2, c4 = c2 * c2;
    return {-(p.a / 48.0) * (44.0 * a4 + 72.0 * a2 * b2 - 5.0 * a2 * c2 + 28.0 * b4 + 24.0 * b2 * c4 - 4.0 * c4),
            -(p.b / 48.0) * (60.0 * a4 + 104.0 * a2 * b2 + 57.0 * a2 * c2 + 44.0 * b4 + 104.0 * b2 * c2 + 60.0 * c4),
            -(p.c / 48.0) * (-4.0 * a4 + 24.0 * a2 * b2 - 5.0 * a2 * c2 + 28.0 * b4 + 72.0 * b2 * c2 + 44.0 * c4)};
}

struct EvolutionRates {
    double dlog_ac;      // d/dt log(a/c), equals (c^2 - a^2) |mu|^2 identically
    double db2_over_a2;  // d/dt (b^2/a^2), <= -(2/3)(b^2/a^2)|mu|^4
    double dnorm2;       // d/dt |mu|^2,    <= -|mu|^6 / 12
};

inline EvolutionRates evolution_identities(const TriBracket& p) {
    if (!p.in_open_set()) throw std::invalid_argument("evolution identities need a, c > 0");
    TriRates r = ode_rhs(p);
    EvolutionRates e{};
    e.dlog_ac = r.da / p.a - r.dc / p.c;
    e.db2_over_a2 = 2.0 * (p.b * r.db * p.a * p.a - p.b * p.b * p.a * r.da) / (p.a * p.a * p.a * p.a);
    e.dnorm2 = 2.0 * (p.a * r.da + p.b * r.db + p.c * r.dc);
    return e;
}

/// Norm-fixing normalization scalar r = -(1/4) <pi(B) mu, mu>, evaluated with
/// the unordered-pair inner product on brackets.  Along the r-normalized flow
/// started at |mu| = 2 the norm is constant.
inline double normalization_r(const TriBracket& p) {
    BracketTensor mu = BracketTensor::embed(p);
    BracketTensor pb = pi_rep(closed_form_bach(p).matrix(), mu);
    return -0.25 * bracket_inner(pb, mu);
}

/// Reduced scalar curvature identity at the canonical normalization.
inline double scalar_curvature(const TriBracket& p) { return -p.norm_sq() / 4.0; }

/// Candidate algebraic soliton in the b = 0 slice: B = lambda I + D with a
/// diagonal derivation D = diag(alpha, beta, alpha+beta, 2 alpha + beta).
struct SolitonSolution {
    double a = 1.0;
    double c = 1.0;
    double alpha = 0.0;
    double beta = 0.0;
    double lambda = 0.0;  // always -(4 alpha + 3 beta)/4
    double residual = 0.0;
};

inline double soliton_lambda(double alpha, double beta) { return -(4.0 * alpha + 3.0 * beta) / 4.0; }

/// Max-norm residual of B_{mu_{a,0,c}} = lambda I + diag(alpha, beta,
/// alpha+beta, 2 alpha+beta), with lambda eliminated by trace-freeness.
inline double soliton_residual(const SolitonSolution& s) {
    if (s.a <= 0.0 || s.c <= 0.0) throw std::invalid_argument("soliton residual needs a, c > 0");
    BachCoefficients k = closed_form_bach({s.a, 0.0, s.c});
    double lambda = soliton_lambda(s.alpha, s.beta);
    double d1 = s.alpha, d2 = s.beta, d3 = s.alpha + s.beta, d4 = 2.0 * s.alpha + s.beta;
    double r = std::abs(k.b1 - lambda - d1);
    r = std::max(r, std::abs(k.b2 - lambda - d2));
    r = std::max(r, std::abs(k.b3 - lambda - d3));
    r = std::max(r, std::abs(k.b4 - lambda - d4));
    return r;
}

}  // namespace bachflow
