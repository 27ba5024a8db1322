#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "bachflow/bracket.hpp"
#include "bachflow/linalg.hpp"

namespace bachflow {

// Frame tensors over the 4-dimensional Lie algebra, dense row-major storage.
struct Tensor3 {
    std::array<double, 64> v{};
    double& operator()(int i, int j, int k) { return v[static_cast<std::size_t>((i * 4 + j) * 4 + k)]; }
    double operator()(int i, int j, int k) const { return v[static_cast<std::size_t>((i * 4 + j) * 4 + k)]; }
};
struct Tensor4 {
    std::array<double, 256> v{};
    double& operator()(int i, int j, int k, int l) {
        return v[static_cast<std::size_t>(((i * 4 + j) * 4 + k) * 4 + l)];
    }
    double operator()(int i, int j, int k, int l) const {
        return v[static_cast<std::size_t>(((i * 4 + j) * 4 + k) * 4 + l)];
    }
    double max_abs() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
};
struct Tensor5 {
    std::array<double, 1024> v{};
    double& operator()(int m, int i, int j, int k, int l) {
        return v[static_cast<std::size_t>((((m * 4 + i) * 4 + j) * 4 + k) * 4 + l)];
    }
    double operator()(int m, int i, int j, int k, int l) const {
        return v[static_cast<std::size_t>((((m * 4 + i) * 4 + j) * 4 + k) * 4 + l)];
    }
    double max_abs() const {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
};
struct Tensor6 {
    std::array<double, 4096> v{};
    double& operator()(int n, int m, int i, int j, int k, int l) {
        return v[static_cast<std::size_t>(((((n * 4 + m) * 4 + i) * 4 + j) * 4 + k) * 4 + l)];
    }
    double operator()(int n, int m, int i, int j, int k, int l) const {
        return v[static_cast<std::size_t>(((((n * 4 + m) * 4 + i) * 4 + j) * 4 + k) * 4 + l)];
    }
};

/// Inner product at the identity, as a Gram matrix in the standard frame.
struct MetricSpec {
    Mat4 gram;

    MetricSpec() : gram(Mat4::identity()) {}

    explicit MetricSpec(const Mat4& g) : gram(g) {
        double scale = std::max(g.max_abs(), 1e-300);
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                if (std::abs(g(i, j) - g(j, i)) > 1e-14 * scale)
                    throw std::invalid_argument("metric gram matrix is not symmetric");
        Mat4 l;
        if (!cholesky(gram, l)) throw std::invalid_argument("metric gram matrix is not positive definite");
    }

    static MetricSpec identity() { return MetricSpec{}; }

    /// Lower-triangular h with h^T h = gram.  This particular factor maps the
    /// standard flag to itself, so gauge-transformed brackets keep their
    /// nilpotent staircase.
    Mat4 lower_factor() const {
        Mat4 u;
        if (!cholesky_upper(gram, u)) throw std::invalid_argument("metric gram matrix is not positive definite");
        return u.transposed();
    }
};

/// Connection coefficients of the left-invariant Levi-Civita connection:
/// gamma(m,i,q) is the e_q component of nabla_{e_m} e_i, from the Koszul sum
///   2 G(nabla_{e_m} e_i, e_k) = G(mu(e_m,e_i),e_k) - G(mu(e_i,e_k),e_m) + G(mu(e_k,e_m),e_i).
inline Tensor3 levi_civita(const BracketTensor& mu, const MetricSpec& g) {
    const Mat4& G = g.gram;
    Tensor3 gamma;
    for (int m = 0; m < 4; ++m)
        for (int i = 0; i < 4; ++i) {
            Vec4 rhs{};
            for (int k = 0; k < 4; ++k) {
                double t = 0.0;
                for (int s = 0; s < 4; ++s) {
                    t += G(s, k) * mu.comp(m, i, s);
                    t -= G(s, m) * mu.comp(i, k, s);
                    t += G(s, i) * mu.comp(k, m, s);
                }
                rhs[static_cast<std::size_t>(k)] = 0.5 * t;
            }
            Vec4 w = solve(G, rhs, "metric gram matrix is singular");
            for (int q = 0; q < 4; ++q) gamma(m, i, q) = w[static_cast<std::size_t>(q)];
        }
    return gamma;
}

/// Fully covariant curvature Rm(i,j,k,l) = G(R(e_i,e_j) e_k, e_l) with
/// R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_{mu(X,Y)} Z.
/// Sign convention: the round sphere has positive sectional curvature Rm(i,j,j,i).
inline Tensor4 riemann(const Tensor3& gamma, const BracketTensor& mu, const MetricSpec& g) {
    const Mat4& G = g.gram;
    Tensor4 rm;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) {
                Vec4 r{};
                for (int q = 0; q < 4; ++q) {
                    double x = 0.0;
                    for (int m = 0; m < 4; ++m) {
                        x += gamma(j, k, m) * gamma(i, m, q);
                        x -= gamma(i, k, m) * gamma(j, m, q);
                        x -= mu.comp(i, j, m) * gamma(m, k, q);
                    }
                    r[static_cast<std::size_t>(q)] = x;
                }
                for (int l = 0; l < 4; ++l) {
                    double s = 0.0;
                    for (int q = 0; q < 4; ++q) s += G(q, l) * r[static_cast<std::size_t>(q)];
                    rm(i, j, k, l) = s;
                }
            }
    return rm;
}

inline Mat4 ricci(const Tensor4& rm, const MetricSpec& g) {
    Mat4 gi = inverse(g.gram, "metric gram matrix is singular");
    Mat4 ric;
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
            KahanSum s;
            for (int i = 0; i < 4; ++i)
                for (int m = 0; m < 4; ++m) s.add(gi(i, m) * rm(i, k, l, m));
            ric(k, l) = s.value();
        }
    return ric;
}

inline double scalar_curv(const Mat4& ric, const MetricSpec& g) {
    Mat4 gi = inverse(g.gram, "metric gram matrix is singular");
    KahanSum s;
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) s.add(gi(k, l) * ric(k, l));
    return s.value();
}

/// Kulkarni-Nomizu product adapted to the Rm index order above, so that a
/// constant-curvature tensor is (K/2) (g ^ g).
inline Tensor4 kulkarni_nomizu(const Mat4& A, const Mat4& B) {
    Tensor4 out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l)
                    out(i, j, k, l) = A(j, k) * B(i, l) + A(i, l) * B(j, k) -
                                      A(i, k) * B(j, l) - A(j, l) * B(i, k);
    return out;
}

/// Weyl tensor: Rm minus the Kulkarni-Nomizu product of the Schouten tensor
/// P = (Ric - (s/6) g)/2 with g.  Totally trace-free in dimension 4.
inline Tensor4 weyl(const Tensor4& rm, const Mat4& ric, double s, const MetricSpec& g) {
    Mat4 p = 0.5 * (ric - (s / 6.0) * g.gram);
    Tensor4 png = kulkarni_nomizu(p, g.gram);
    Tensor4 w;
    for (std::size_t q = 0; q < w.v.size(); ++q) w.v[q] = rm.v[q] - png.v[q];
    return w;
}

/// Covariant derivative of a covariant tensor with constant frame components:
/// (nabla_m T)_{i1..ip} = - sum_r gamma(m, i_r, q) T_{i1..q..ip}.
/// A left-invariant scalar is constant, so its differential vanishes (and with
/// it the Laplacian of the scalar curvature).
inline Vec4 covariant_derivative(double /*scalar*/, const Tensor3& /*gamma*/) { return Vec4{}; }

inline Tensor3 covariant_derivative(const Mat4& t, const Tensor3& gamma) {
    Tensor3 out;
    for (int m = 0; m < 4; ++m)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0.0;
                for (int q = 0; q < 4; ++q)
                    s -= gamma(m, i, q) * t(q, j) + gamma(m, j, q) * t(i, q);
                out(m, i, j) = s;
            }
    return out;
}

inline Tensor5 covariant_derivative(const Tensor4& t, const Tensor3& gamma) {
    Tensor5 out;
    for (int m = 0; m < 4; ++m)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k)
                    for (int l = 0; l < 4; ++l) {
                        double s = 0.0;
                        for (int q = 0; q < 4; ++q) {
                            s -= gamma(m, i, q) * t(q, j, k, l);
                            s -= gamma(m, j, q) * t(i, q, k, l);
                            s -= gamma(m, k, q) * t(i, j, q, l);
                            s -= gamma(m, l, q) * t(i, j, k, q);
                        }
                        out(m, i, j, k, l) = s;
                    }
    return out;
}

inline Tensor6 covariant_derivative(const Tensor5& t, const Tensor3& gamma) {
    Tensor6 out;
    for (int n = 0; n < 4; ++n)
        for (int m = 0; m < 4; ++m)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    for (int k = 0; k < 4; ++k)
                        for (int l = 0; l < 4; ++l) {
                            double s = 0.0;
                            for (int q = 0; q < 4; ++q) {
                                s -= gamma(n, m, q) * t(q, i, j, k, l);
                                s -= gamma(n, i, q) * t(m, q, j, k, l);
                                s -= gamma(n, j, q) * t(m, i, q, k, l);
                                s -= gamma(n, k, q) * t(m, i, j, q, l);
                                s -= gamma(n, l, q) * t(m, i, j, k, q);
                            }
                            out(n, m, i, j, k, l) = s;
                        }
    return out;
}

/// Full metric contraction |T|^2 with all four indices raised by G.
inline double tensor4_norm_sq(const Tensor4& t, const MetricSpec& g) {
    Mat4 gi = inverse(g.gram, "metric gram matrix is singular");
    // raise one index at a time
    Tensor4 up = t;
    for (int slot = 0; slot < 4; ++slot) {
        Tensor4 next;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k)
                    for (int l = 0; l < 4; ++l) {
                        double s = 0.0;
                        for (int q = 0; q < 4; ++q) {
                            int idx[4] = {i, j, k, l};
                            int src[4] = {i, j, k, l};
                            src[slot] = q;
                            s += gi(idx[slot], q) * up(src[0], src[1], src[2], src[3]);
                        }
                        next(i, j, k, l) = s;
                    }
        up = next;
    }
    KahanSum s;
    for (std::size_t q = 0; q < t.v.size(); ++q) s.add(up.v[q] * t.v[q]);
    return s.value();
}

/// The two building blocks of the Bach tensor, at whatever bracket is passed in:
/// div2(i,j)    = G^{nk} G^{ml} (nabla_n nabla_m W)_{kijl}
/// ric_weyl(i,j) = (1/2) R^{kl} W_{kijl}
/// In this Riemann convention the Bach bilinear form is div2 + ric_weyl; the
/// alternative sign/slot assemblies are kept around for the verification report.
struct BachTerms {
    Mat4 div2;
    Mat4 ric_weyl;
};

inline BachTerms bach_terms(const Tensor4& w, const Mat4& ric, const Tensor3& gamma,
                            const MetricSpec& g) {
    Mat4 gi = inverse(g.gram, "metric gram matrix is singular");
    Tensor5 dw = covariant_derivative(w, gamma);
    Tensor6 ddw = covariant_derivative(dw, gamma);
    BachTerms out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            KahanSum s;
            for (int n = 0; n < 4; ++n)
                for (int k = 0; k < 4; ++k) {
                    double gnk = gi(n, k);
                    if (gnk == 0.0) continue;
                    for (int m = 0; m < 4; ++m)
                        for (int l = 0; l < 4; ++l) s.add(gnk * gi(m, l) * ddw(n, m, k, i, j, l));
                }
            out.div2(i, j) = s.value();
        }
    Mat4 rup;
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
            double s = 0.0;
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q) s += gi(k, p) * gi(l, q) * ric(p, q);
            rup(k, l) = s;
        }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            KahanSum s;
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l) s.add(0.5 * rup(k, l) * w(k, i, j, l));
            out.ric_weyl(i, j) = s.value();
        }
    return out;
}

/// Everything the first-principles pipeline produces for one (bracket, metric)
/// pair, reported at the canonical bracket normalization mu/sqrt(2).  With that
/// normalization the scalar curvature of the reduced family is -(a^2+b^2+c^2)/4
/// and the Bach operator of the unnormalized metric is 4 (div2 + ric_weyl).
struct CurvatureBundle {
    Tensor3 gamma;
    Tensor4 riemann;
    Mat4 ricci;
    double scalar = 0.0;
    Tensor4 weyl;
    Mat4 weyl_div2;
    Mat4 bach_bilinear;   // Bach form of the unnormalized metric
    Mat4 bach_endo;       // gram^{-1} bach_bilinear
};

inline constexpr double kCanonicalBracketScale = 0.70710678118654752440;  // 1/sqrt(2)

inline CurvatureBundle curvature_bundle(const BracketTensor& mu, const MetricSpec& g) {
    BracketTensor scaled = kCanonicalBracketScale * mu;
    CurvatureBundle b;
    b.gamma = levi_civita(scaled, g);
    b.riemann = riemann(b.gamma, scaled, g);
    b.ricci = ricci(b.riemann, g);
    b.scalar = scalar_curv(b.ricci, g);
    b.weyl = weyl(b.riemann, b.ricci, b.scalar, g);
    BachTerms terms = bach_terms(b.weyl, b.ricci, b.gamma, g);
    b.weyl_div2 = terms.div2;
    b.bach_bilinear = 4.0 * (terms.div2 + terms.ric_weyl);
    b.bach_endo = inverse(g.gram, "metric gram matrix is singular") * b.bach_bilinear;
    return b;
}

struct BachResult {
    Mat4 bilinear;
    Mat4 endo;
};

/// First-principles Bach tensor of (mu, g): both the bilinear form and the
/// endomorphism.  Quartic rescaling cancels the canonical normalization, so
/// this is exactly the (divergence-free, trace-free) Bach tensor of the
/// unnormalized left-invariant metric.
inline BachResult bach_oracle(const BracketTensor& mu, const MetricSpec& g) {
    CurvatureBundle b = curvature_bundle(mu, g);
    return {b.bach_bilinear, b.bach_endo};
}

}  // namespace bachflow
