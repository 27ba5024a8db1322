#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bachflow {

using Vec4 = std::array<double, 4>;

inline Vec4 operator+(const Vec4& x, const Vec4& y) {
    return {x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]};
}
inline Vec4 operator-(const Vec4& x, const Vec4& y) {
    return {x[0] - y[0], x[1] - y[1], x[2] - y[2], x[3] - y[3]};
}
inline Vec4 operator*(double s, const Vec4& x) {
    return {s * x[0], s * x[1], s * x[2], s * x[3]};
}
inline double dot(const Vec4& x, const Vec4& y) {
    return x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3];
}
inline double norm(const Vec4& x) { return std::sqrt(dot(x, x)); }
inline Vec4 basis_vec(int i) {
    Vec4 e{0.0, 0.0, 0.0, 0.0};
    e[static_cast<std::size_t>(i)] = 1.0;
    return e;
}

/// Dense 4x4 matrix, row major.
struct Mat4 {
    std::array<double, 16> a{};

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(4 * i + j)]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(4 * i + j)]; }

    static Mat4 zero() { return Mat4{}; }
    static Mat4 identity() {
        Mat4 m;
        for (int i = 0; i < 4; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat4 diag(double d0, double d1, double d2, double d3) {
        Mat4 m;
        m(0, 0) = d0; m(1, 1) = d1; m(2, 2) = d2; m(3, 3) = d3;
        return m;
    }

    Mat4 transposed() const {
        Mat4 m;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) = (*this)(j, i);
        return m;
    }
    double trace() const { return a[0] + a[5] + a[10] + a[15]; }
    double max_abs() const {
        double m = 0.0;
        for (double v : a) m = std::max(m, std::abs(v));
        return m;
    }
    double frobenius() const {
        double s = 0.0;
        for (double v : a) s += v * v;
        return std::sqrt(s);
    }
};

inline Mat4 operator+(const Mat4& x, const Mat4& y) {
    Mat4 m;
    for (std::size_t i = 0; i < 16; ++i) m.a[i] = x.a[i] + y.a[i];
    return m;
}
inline Mat4 operator-(const Mat4& x, const Mat4& y) {
    Mat4 m;
    for (std::size_t i = 0; i < 16; ++i) m.a[i] = x.a[i] - y.a[i];
    return m;
}
inline Mat4 operator*(double s, const Mat4& x) {
    Mat4 m;
    for (std::size_t i = 0; i < 16; ++i) m.a[i] = s * x.a[i];
    return m;
}
inline Mat4 operator*(const Mat4& x, const Mat4& y) {
    Mat4 m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += x(i, k) * y(k, j);
            m(i, j) = s;
        }
    return m;
}
inline Vec4 operator*(const Mat4& m, const Vec4& x) {
    Vec4 y{};
    for (int i = 0; i < 4; ++i) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j) s += m(i, j) * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = s;
    }
    return y;
}

/// Solve m x = b by Gaussian elimination with partial pivoting.
/// Throws std::invalid_argument with `singular_msg` if a pivot collapses.
inline Vec4 solve(Mat4 m, Vec4 b, const char* singular_msg = "singular matrix") {
    const double scale = std::max(m.max_abs(), 1e-300);
    std::array<int, 4> perm{0, 1, 2, 3};
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
        if (std::abs(m(piv, col)) < 1e-13 * scale) throw std::invalid_argument(singular_msg);
        if (piv != col) {
            for (int j = 0; j < 4; ++j) std::swap(m(piv, j), m(col, j));
            std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
            std::swap(perm[static_cast<std::size_t>(piv)], perm[static_cast<std::size_t>(col)]);
        }
        for (int r = col + 1; r < 4; ++r) {
            double f = m(r, col) / m(col, col);
            m(r, col) = 0.0;
            for (int j = col + 1; j < 4; ++j) m(r, j) -= f * m(col, j);
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    Vec4 x{};
    for (int i = 3; i >= 0; --i) {
        double s = b[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < 4; ++j) s -= m(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = s / m(i, i);
    }
    return x;
}

inline Mat4 inverse(const Mat4& m, const char* singular_msg = "singular matrix") {
    Mat4 inv;
    for (int j = 0; j < 4; ++j) {
        Vec4 col = solve(m, basis_vec(j), singular_msg);
        for (int i = 0; i < 4; ++i) inv(i, j) = col[static_cast<std::size_t>(i)];
    }
    return inv;
}

/// Cholesky factor L (lower, G = L L^T). Returns false if G is not positive definite.
inline bool cholesky(const Mat4& g, Mat4& lower) {
    lower = Mat4::zero();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = g(i, j);
            for (int k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            if (i == j) {
                if (s <= 0.0) return false;
                lower(i, i) = std::sqrt(s);
            } else {
                lower(i, j) = s / lower(j, j);
            }
        }
    }
    return true;
}

/// Factor G = U U^T with U upper triangular (Cholesky in reversed index order).
/// Then h := U^T is lower triangular with h^T h = G.
inline bool cholesky_upper(const Mat4& g, Mat4& upper) {
    Mat4 flipped;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) flipped(i, j) = g(3 - i, 3 - j);
    Mat4 lower;
    if (!cholesky(flipped, lower)) return false;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) upper(i, j) = lower(3 - i, 3 - j);
    return true;
}

/// exp(m) by scaling-and-squaring on a plain Taylor series.
inline Mat4 matrix_exp(const Mat4& m) {
    int squarings = 0;
    double nrm = m.max_abs();
    Mat4 scaled = m;
    while (nrm > 0.5) {
        scaled = 0.5 * scaled;
        nrm *= 0.5;
        ++squarings;
    }
    Mat4 result = Mat4::identity();
    Mat4 term = Mat4::identity();
    for (int k = 1; k <= 24; ++k) {
        term = (1.0 / k) * (term * scaled);
        result = result + term;
    }
    for (int i = 0; i < squarings; ++i) result = result * result;
    return result;
}

/// Numerical rank of a dense row-major rows x cols matrix (Gauss with full row pivoting).
inline int matrix_rank(std::vector<double> m, int rows, int cols, double tol) {
    double scale = 0.0;
    for (double v : m) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0;
    const double thresh = tol * scale;
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int piv = -1;
        double best = thresh;
        for (int r = rank; r < rows; ++r) {
            double v = std::abs(m[static_cast<std::size_t>(r * cols + col)]);
            if (v > best) { best = v; piv = r; }
        }
        if (piv < 0) continue;
        if (piv != rank)
            for (int j = 0; j < cols; ++j)
                std::swap(m[static_cast<std::size_t>(piv * cols + j)],
                          m[static_cast<std::size_t>(rank * cols + j)]);
        for (int r = 0; r < rows; ++r) {
            if (r == rank) continue;
            double f = m[static_cast<std::size_t>(r * cols + col)] /
                       m[static_cast<std::size_t>(rank * cols + col)];
            if (f == 0.0) continue;
            for (int j = 0; j < cols; ++j)
                m[static_cast<std::size_t>(r * cols + j)] -= f * m[static_cast<std::size_t>(rank * cols + j)];
        }
        ++rank;
    }
    return rank;
}

/// Compensated (Kahan) accumulator for long contractions.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        double y = x - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

}  // namespace bachflow
