#pragma once

#include <stdexcept>
#include <vector>

#include "bachflow/bracket.hpp"
#include "bachflow/linalg.hpp"

namespace bachflow {

/// Parametrised derivation of mu_{a,b,c}: diagonal (alpha, beta, alpha+beta,
/// 2 alpha + beta), four free strict-lower entries, and the coupled entries
/// D(3,2) = a gamma + b alpha / c, D(4,3) = c gamma.
///
/// The (3,2) coupling follows from expanding the derivation identity on
/// mu(e1,e2): the e4 component forces c D(3,2) = a D(4,3) + b alpha.  At b = 0
/// it reduces to the familiar a gamma.
struct DerivationParams {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double l21 = 0.0, l31 = 0.0, l41 = 0.0, l42 = 0.0;

    Mat4 matrix(const TriBracket& p) const {
        if (p.c <= 0.0 && p.b != 0.0)
            throw std::invalid_argument("derivation shape needs c > 0 when b != 0");
        Mat4 d;
        d(0, 0) = alpha;
        d(1, 1) = beta;
        d(2, 2) = alpha + beta;
        d(3, 3) = 2.0 * alpha + beta;
        d(1, 0) = l21;
        d(2, 0) = l31;
        d(3, 0) = l41;
        d(3, 1) = l42;
        d(2, 1) = p.a * gamma + (p.b == 0.0 ? 0.0 : p.b * alpha / p.c);
        d(3, 2) = p.c * gamma;
        return d;
    }
};

/// Dimension of Der(mu) as the nullity of the linearised derivation-defect map
/// (24 defect components, 16 matrix entries).  For the reduced family this is 7.
inline int derivation_space_dimension(const BracketTensor& mu, double tol = 1e-9) {
    std::vector<double> rows(24 * 16, 0.0);
    int row = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            Vec4 v = mu.eval(basis_vec(i), basis_vec(j));
            for (int p = 0; p < 4; ++p)
                for (int q = 0; q < 4; ++q) {
                    // defect components on (e_i, e_j) are linear in D; this is
                    // the coefficient of the unit entry D = E_pq
                    Vec4 r{};
                    r[static_cast<std::size_t>(p)] = v[static_cast<std::size_t>(q)];
                    if (q == i) r = r - mu.eval(basis_vec(p), basis_vec(j));
                    if (q == j) r = r - mu.eval(basis_vec(i), basis_vec(p));
                    for (int k = 0; k < 4; ++k)
                        rows[static_cast<std::size_t>((row + k) * 16 + (4 * p + q))] =
                            r[static_cast<std::size_t>(k)];
                }
            row += 4;
        }
    return 16 - matrix_rank(rows, 24, 16, tol);
}

}  // namespace bachflow
