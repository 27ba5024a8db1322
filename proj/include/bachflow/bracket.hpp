#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "bachflow/linalg.hpp"

namespace bachflow {

/// Reduced structure-constant triple: mu(e1,e2) = a e3 + b e4, mu(e1,e3) = c e4.
/// The open parameter set has a, c > 0; the closed rays b = 0 and/or c = 0 are
/// meaningful limits (c = b = 0 is the Heisenberg-times-line algebra).
struct TriBracket {
    double a = 1.0;
    double b = 0.0;
    double c = 1.0;

    double norm_sq() const { return a * a + b * b + c * c; }

    bool in_open_set() const { return a > 0.0 && c > 0.0; }
};

/// Antisymmetric structure-constant tensor mu_ij^k on R^4.
/// Storage holds only the 24 independent entries with i < j; the signed
/// component view enforces mu_ij^k = -mu_ji^k by construction.
class BracketTensor {
  public:
    static constexpr int kSize = 24;

    BracketTensor() = default;

    static BracketTensor zero() { return BracketTensor{}; }

    /// The abelian algebra (same as zero(); named for the three-algebra catalog).
    static BracketTensor abelian() { return BracketTensor{}; }

    static BracketTensor embed(const TriBracket& p) {
        BracketTensor mu;
        mu.set(0, 1, 2, p.a);
        mu.set(0, 1, 3, p.b);
        mu.set(0, 2, 3, p.c);
        return mu;
    }

    /// R + h3: mu(e1,e2) = a e3.
    static BracketTensor heisenberg(double a) {
        BracketTensor mu;
        mu.set(0, 1, 2, a);
        return mu;
    }

    /// The indecomposable nilpotent algebra in its standard frame.
    static BracketTensor n4(double a, double b, double c) { return embed({a, b, c}); }

    /// Signed component mu_ij^k (zero-based indices).
    double comp(int i, int j, int k) const {
        if (i == j) return 0.0;
        if (i < j) return v_[idx(i, j, k)];
        return -v_[idx(j, i, k)];
    }

    void set(int i, int j, int k, double value) {
        if (i == j) {
            if (value != 0.0) throw std::invalid_argument("mu(e_i,e_i) must vanish");
            return;
        }
        if (i < j)
            v_[idx(i, j, k)] = value;
        else
            v_[idx(j, i, k)] = -value;
    }

    /// mu(x, y) by bilinear expansion.
    Vec4 eval(const Vec4& x, const Vec4& y) const {
        Vec4 out{};
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                double w = x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] -
                           x[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(i)];
                if (w == 0.0) continue;
                for (int k = 0; k < 4; ++k)
                    out[static_cast<std::size_t>(k)] += w * v_[idx(i, j, k)];
            }
        return out;
    }

    /// The (1,2,3), (1,2,4), (1,3,4) components, ignoring everything else.
    TriBracket tri_components() const { return {comp(0, 1, 2), comp(0, 1, 3), comp(0, 2, 3)}; }

    /// Largest entry outside the reduced slice (the 21 off-structure components).
    double off_structure_max() const {
        double m = 0.0;
        for (int p = 0; p < 6; ++p)
            for (int k = 0; k < 4; ++k) {
                int flat = 4 * p + k;
                if (flat == idx(0, 1, 2) || flat == idx(0, 1, 3) || flat == idx(0, 2, 3)) continue;
                m = std::max(m, std::abs(v_[static_cast<std::size_t>(flat)]));
            }
        return m;
    }

    std::array<double, kSize>& raw() { return v_; }
    const std::array<double, kSize>& raw() const { return v_; }

  private:
    static std::size_t idx(int i, int j, int k) {
        // pairs (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
        static constexpr int pair_of[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
        return static_cast<std::size_t>(4 * pair_of[i][j] + k);
    }

    std::array<double, kSize> v_{};
};

inline BracketTensor operator+(const BracketTensor& x, const BracketTensor& y) {
    BracketTensor out;
    for (int i = 0; i < BracketTensor::kSize; ++i)
        out.raw()[static_cast<std::size_t>(i)] =
            x.raw()[static_cast<std::size_t>(i)] + y.raw()[static_cast<std::size_t>(i)];
    return out;
}
inline BracketTensor operator-(const BracketTensor& x, const BracketTensor& y) {
    BracketTensor out;
    for (int i = 0; i < BracketTensor::kSize; ++i)
        out.raw()[static_cast<std::size_t>(i)] =
            x.raw()[static_cast<std::size_t>(i)] - y.raw()[static_cast<std::size_t>(i)];
    return out;
}
inline BracketTensor operator*(double s, const BracketTensor& x) {
    BracketTensor out;
    for (int i = 0; i < BracketTensor::kSize; ++i)
        out.raw()[static_cast<std::size_t>(i)] = s * x.raw()[static_cast<std::size_t>(i)];
    return out;
}

/// Squared norm over unordered basis pairs: sum_{i<j} |mu(e_i,e_j)|^2,
/// so that the reduced triple gives exactly a^2 + b^2 + c^2.
inline double bracket_norm_sq(const BracketTensor& mu) {
    double s = 0.0;
    for (double v : mu.raw()) s += v * v;
    return s;
}

/// Matching inner product on brackets.
inline double bracket_inner(const BracketTensor& x, const BracketTensor& y) {
    double s = 0.0;
    for (int i = 0; i < BracketTensor::kSize; ++i)
        s += x.raw()[static_cast<std::size_t>(i)] * y.raw()[static_cast<std::size_t>(i)];
    return s;
}

/// Max over basis triples of |mu(mu(x,y),z) + mu(mu(y,z),x) + mu(mu(z,x),y)|.
inline double jacobi_defect(const BracketTensor& mu) {
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            for (int k = j + 1; k < 4; ++k) {
                Vec4 ei = basis_vec(i), ej = basis_vec(j), ek = basis_vec(k);
                Vec4 cyc = mu.eval(mu.eval(ei, ej), ek) + mu.eval(mu.eval(ej, ek), ei) +
                           mu.eval(mu.eval(ek, ei), ej);
                worst = std::max(worst, norm(cyc));
            }
    return worst;
}

/// Max over basis vectors of the Frobenius norm of (ad x)^4; vanishes exactly
/// on 4-dimensional nilpotent brackets.
inline double nilpotency_defect(const BracketTensor& mu) {
    double worst = 0.0;
    for (int x = 0; x < 4; ++x) {
        Mat4 ad;
        for (int j = 0; j < 4; ++j) {
            Vec4 col = mu.eval(basis_vec(x), basis_vec(j));
            for (int i = 0; i < 4; ++i) ad(i, j) = col[static_cast<std::size_t>(i)];
        }
        Mat4 p = ad * ad;
        p = p * p;
        worst = std::max(worst, p.frobenius());
    }
    return worst;
}

inline bool is_validated_nilpotent(const BracketTensor& mu, double tol = 1e-12) {
    return jacobi_defect(mu) <= tol && nilpotency_defect(mu) <= tol;
}

/// Change-of-basis action h . mu = h mu(h^{-1} ., h^{-1} .).
inline BracketTensor gl_action(const Mat4& h, const BracketTensor& mu) {
    Mat4 hinv = inverse(h, "non-invertible gauge");
    BracketTensor out;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            Vec4 hi{hinv(0, i), hinv(1, i), hinv(2, i), hinv(3, i)};
            Vec4 hj{hinv(0, j), hinv(1, j), hinv(2, j), hinv(3, j)};
            Vec4 w = h * mu.eval(hi, hj);
            for (int k = 0; k < 4; ++k) out.set(i, j, k, w[static_cast<std::size_t>(k)]);
        }
    return out;
}

/// Derivative of the change-of-basis action:
/// pi(A) mu = A mu(.,.) - mu(A.,.) - mu(.,A.).  pi(I) mu = -mu.
inline BracketTensor pi_rep(const Mat4& A, const BracketTensor& mu) {
    BracketTensor out;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            Vec4 ei = basis_vec(i), ej = basis_vec(j);
            Vec4 Aei{A(0, i), A(1, i), A(2, i), A(3, i)};
            Vec4 Aej{A(0, j), A(1, j), A(2, j), A(3, j)};
            Vec4 w = A * mu.eval(ei, ej) - mu.eval(Aei, ej) - mu.eval(ei, Aej);
            for (int k = 0; k < 4; ++k) out.set(i, j, k, w[static_cast<std::size_t>(k)]);
        }
    return out;
}

/// Group law in exponential coordinates (series terminates for nilpotent mu):
/// x . y = x + y + mu(x,y)/2 + mu(mu(x,y),y)/12 - mu(mu(x,y),x)/12.
inline Vec4 group_multiply(const Vec4& x, const Vec4& y, const BracketTensor& mu) {
    Vec4 xy = mu.eval(x, y);
    return x + y + 0.5 * xy + (1.0 / 12.0) * mu.eval(xy, y) - (1.0 / 12.0) * mu.eval(xy, x);
}

/// Max over basis pairs of |D mu(e_i,e_j) - mu(D e_i, e_j) - mu(e_i, D e_j)|;
/// zero iff D is a derivation of mu.
inline double derivation_defect(const Mat4& D, const BracketTensor& mu) {
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            Vec4 ei = basis_vec(i), ej = basis_vec(j);
            Vec4 Dei{D(0, i), D(1, i), D(2, i), D(3, i)};
            Vec4 Dej{D(0, j), D(1, j), D(2, j), D(3, j)};
            Vec4 r = D * mu.eval(ei, ej) - mu.eval(Dei, ej) - mu.eval(ei, Dej);
            worst = std::max(worst, norm(r));
        }
    return worst;
}

}  // namespace bachflow
