#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "bachflow/linalg.hpp"

namespace bachflow {

/// Seeded generator with portable derived distributions, so that a fixed seed
/// yields byte-identical outputs across platforms and standard libraries.
struct Rng {
    std::mt19937_64 gen;

    explicit Rng(std::uint64_t seed) : gen(seed) {}

    /// Uniform in (0, 1].
    double uniform01() { return static_cast<double>((gen() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = uniform01();
        double v = uniform01();
        double r = std::sqrt(-2.0 * std::log(u));
        spare_ = r * std::sin(2.0 * M_PI * v);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * v);
    }

    Mat4 random_matrix(double scale = 1.0) {
        Mat4 m;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) = scale * normal();
        return m;
    }

    /// Haar-ish random orthogonal matrix: Gram-Schmidt on Gaussian columns.
    Mat4 random_orthogonal() {
        Mat4 m = random_matrix();
        Mat4 q = Mat4::zero();
        for (int j = 0; j < 4; ++j) {
            Vec4 v{m(0, j), m(1, j), m(2, j), m(3, j)};
            for (int k = 0; k < j; ++k) {
                Vec4 u{q(0, k), q(1, k), q(2, k), q(3, k)};
                v = v - dot(u, v) * u;
            }
            double n = norm(v);
            if (n < 1e-12) return random_orthogonal();  // essentially never
            v = (1.0 / n) * v;
            for (int i = 0; i < 4; ++i) q(i, j) = v[static_cast<std::size_t>(i)];
        }
        return q;
    }

    /// Random symmetric positive definite matrix A A^T + eps I.
    Mat4 random_spd(double eps = 0.5) {
        Mat4 m = random_matrix();
        Mat4 g = m * m.transposed();
        for (int i = 0; i < 4; ++i) g(i, i) += eps;
        return g;
    }

  private:
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace bachflow
