#pragma once

// Shared generators and independent oracles for the test suites. Everything
// here is deliberately brute-force and kept separate from the library code
// paths it cross-checks.

#include <cmath>
#include <optional>
#include <vector>

#include "ocorg/matrix.hpp"
#include "ocorg/polytope.hpp"
#include "ocorg/rng.hpp"
#include "ocorg/system.hpp"

namespace test_support {

using ocorg::Matrix;
using ocorg::Polytope;
using ocorg::Vector;

inline Matrix matrix_power(const Matrix& a, std::size_t t) {
    Matrix p = Matrix::identity(a.rows());
    for (std::size_t k = 0; k < t; ++k) p = p * a;
    return p;
}

// Random matrix with entries uniform in [-1, 1], rescaled by 0.8 until the
// Lyapunov certificate produces an envelope with sigma <= sigma_target.
inline Matrix random_stable_matrix(ocorg::SplitMix64& rng, std::size_t n, double sigma_target = 0.95) {
    Matrix a(n, n);
    for (std::size_t k = 0; k < n * n; ++k) a[k] = rng.uniform(-1.0, 1.0);
    for (int pass = 0; pass < 200; ++pass) {
        try {
            const auto env = ocorg::schur_decay_envelope(a);
            if (env.sigma <= sigma_target) return a;
        } catch (const ocorg::NotSchurStable&) {
        }
        a *= 0.8;
    }
    return a * 0.0; // unreachable for finite inputs
}

// LP oracle: maximize c^T z over P by enumerating all dim-subsets of rows,
// solving the corresponding vertex systems and keeping feasible ones.
// Requires P bounded and nonempty with an optimum at a vertex.
inline std::optional<double> vertex_enum_max(const Vector& c, const Polytope& p) {
    const std::size_t d = p.dim();
    const std::size_t m = p.row_count();
    if (m < d) return std::nullopt;
    std::vector<std::size_t> idx(d);
    double best = -std::numeric_limits<double>::infinity();
    bool found = false;
    // iterate over all d-combinations of row indices
    std::vector<std::size_t> comb(d);
    for (std::size_t i = 0; i < d; ++i) comb[i] = i;
    while (true) {
        Matrix a(d, d);
        Vector b(d, 1);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) a(i, j) = p.row(comb[i]).normal[j];
            b[i] = p.row(comb[i]).offset;
        }
        try {
            const Vector z = ocorg::solve_linear(a, b);
            if (ocorg::contains(p, z, 1e-7)) {
                best = std::max(best, ocorg::dot(c, z));
                found = true;
            }
        } catch (const ocorg::SingularMatrix&) {
        }
        // next combination
        std::size_t i = d;
        while (i-- > 0) {
            if (comb[i] + (d - i) < m) {
                ++comb[i];
                for (std::size_t j = i + 1; j < d; ++j) comb[j] = comb[j - 1] + 1;
                break;
            }
            if (i == 0) return found ? std::optional<double>(best) : std::nullopt;
        }
    }
}

// Random bounded polytope: an axis box with random half-widths plus extra
// random rows that keep a ball around the origin feasible.
inline Polytope random_bounded_polytope(ocorg::SplitMix64& rng, std::size_t d, std::size_t extra_rows) {
    std::vector<ocorg::Halfspace> rows;
    for (std::size_t i = 0; i < d; ++i) {
        Vector e(d, 1);
        const double hw = rng.uniform(1.0, 2.5);
        e[i] = 1.0;
        rows.emplace_back(e, hw);
        e[i] = -1.0;
        rows.emplace_back(e, rng.uniform(1.0, 2.5));
    }
    for (std::size_t k = 0; k < extra_rows; ++k) {
        Vector n(d, 1);
        double nn = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            n[i] = rng.uniform(-1.0, 1.0);
            nn += n[i] * n[i];
        }
        if (nn < 1e-4) continue;
        rows.emplace_back(n, rng.uniform(0.3, 1.5) * std::sqrt(nn));
    }
    return Polytope(d, std::move(rows));
}

inline Vector random_point_in_box(ocorg::SplitMix64& rng, const Vector& lo, const Vector& hi) {
    Vector z(lo.size(), 1);
    for (std::size_t i = 0; i < lo.size(); ++i) z[i] = rng.uniform(lo[i], hi[i]);
    return z;
}

// Random stable plant with K = 0, outputs (x, u), and a unit box Y; the
// shared fixture for property tests across modules.
inline ocorg::PrestabilizedSystem random_boxed_prestabilized(ocorg::SplitMix64& rng, std::size_t n,
                                                             double sigma_target = 0.95) {
    const Matrix a = random_stable_matrix(rng, n, sigma_target);
    Matrix b(n, 1);
    for (std::size_t i = 0; i < n; ++i) b[i] = rng.uniform(-1.0, 1.0);
    if (ocorg::max_abs(b) < 0.3) b[0] = 1.0;
    Matrix c0(n + 1, n);
    for (std::size_t i = 0; i < n; ++i) c0(i, i) = 1.0;
    Matrix d0(n + 1, 1);
    d0[n] = 1.0;
    return ocorg::prestabilize(
        ocorg::LtiSystem(a, b, c0, d0, Polytope::box(std::vector<double>(n + 1, 1.0))),
        Matrix(1, n), 0.95);
}

// Brute-force construction of the tightened lambda-contractive MAS of the
// augmented system: every constraint row for t = 0..horizon is materialized
// by explicit matrix powers, plus the (1 - eps)-tightened limit rows. No
// redundancy handling; intended as a membership/support oracle.
inline Polytope brute_force_lambda_mas(const ocorg::PrestabilizedSystem& sys, double lambda,
                                       double eps, std::size_t horizon) {
    const std::size_t n = sys.state_dim();
    const std::size_t m = sys.input_dim();
    const Matrix w = sys.C * sys.S_K + sys.D;
    std::vector<ocorg::Halfspace> rows;
    const auto add_rows = [&](const Matrix& c_phi, double tighten) {
        for (const auto& yrow : sys.base.Y.rows()) {
            Vector normal(m + n, 1);
            for (std::size_t j = 0; j < m; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < w.rows(); ++i) s += yrow.normal[i] * w(i, j);
                normal[j] = s;
            }
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < c_phi.rows(); ++i) s += yrow.normal[i] * c_phi(i, j);
                normal[m + j] = s;
            }
            if (ocorg::max_abs(normal) > 1e-14)
                rows.emplace_back(std::move(normal), tighten * yrow.offset);
        }
    };
    add_rows(Matrix(sys.output_dim(), n), 1.0 - eps); // limit rows
    const Matrix a_scaled = sys.A_K * (1.0 / lambda);
    Matrix c_phi = sys.C;
    for (std::size_t t = 0; t <= horizon; ++t) {
        add_rows(c_phi, 1.0);
        c_phi = c_phi * a_scaled;
    }
    return Polytope(m + n, std::move(rows));
}

// Bisection oracle for the governor line search: largest alpha in [0, 1]
// keeping (v(alpha), x - S_K v(alpha)) inside `set`, assuming alpha = 0 is
// admissible. `set` is typically a brute-force MAS, so this path shares
// nothing with the closed-form ratio test it checks.
inline double bisect_line_search(const Polytope& set, const Vector& v, const Vector& x,
                                 const Vector& r_new, const Matrix& s_k, double tol = 1e-9) {
    const auto member = [&](double a) {
        const Vector va = v + a * (r_new - v);
        return ocorg::contains(set, ocorg::vstack(va, x - s_k * va), 1e-9);
    };
    if (member(1.0)) return 1.0;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (member(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

// Mutual inclusion of two polytopes via support functions.
inline bool same_point_set(const Polytope& a, const Polytope& b, double tol = 1e-7) {
    for (const auto& row : b.rows())
        if (ocorg::support(a, row.normal) > row.offset + tol) return false;
    for (const auto& row : a.rows())
        if (ocorg::support(b, row.normal) > row.offset + tol) return false;
    return true;
}

} // namespace test_support
