#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ocorg/errors.hpp"
#include "ocorg/matrix.hpp"
#include "ocorg/polytope.hpp"

namespace ocorg {

// Plant x+ = A x + B u with output constraint y = C0 x + D0 u in Y.
// Y must be a compact polytope with 0 in its interior.
struct LtiSystem {
    Matrix A, B, C0, D0;
    Polytope Y;

    LtiSystem(Matrix a, Matrix b, Matrix c0, Matrix d0, Polytope y)
        : A(std::move(a)), B(std::move(b)), C0(std::move(c0)), D0(std::move(d0)), Y(std::move(y)) {
        const std::size_t n = A.rows();
        const std::size_t m = B.cols();
        const std::size_t p = C0.rows();
        if (A.cols() != n || B.rows() != n || C0.cols() != n || D0.rows() != p || D0.cols() != m)
            throw DimensionMismatch("LtiSystem: inconsistent A/B/C0/D0 shapes");
        if (Y.dim() != p)
            throw DimensionMismatch("LtiSystem: Y dimension " + std::to_string(Y.dim()) +
                                    " != output dimension " + std::to_string(p));
        // 0 strictly inside Y, and Y bounded (Assumption: compact with 0 in the interior)
        for (const auto& row : Y.rows())
            if (row.offset <= 0.0)
                throw Error("LtiSystem: Y must contain 0 in its interior (row offset <= 0)");
        axis_bounds(Y); // throws Unbounded when Y is not compact
    }

    std::size_t state_dim() const { return A.rows(); }
    std::size_t input_dim() const { return B.cols(); }
    std::size_t output_dim() const { return C0.rows(); }
};

// Ackermann pole placement for single-input systems, u = K x convention:
// K = -[0 ... 0 1] C^{-1} phi(A) so that A + B K has the requested poles.
inline Matrix place_poles_ackermann(const Matrix& a, const Matrix& b, const std::vector<double>& poles) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.rows() != n || b.cols() != 1)
        throw DimensionMismatch("place_poles_ackermann: need square A and n x 1 B");
    if (poles.size() != n)
        throw DimensionMismatch("place_poles_ackermann: need exactly n poles");
    for (double p : poles)
        if (std::abs(p) >= 1.0)
            throw UnstablePoleRequested("place_poles_ackermann: |pole| = " + std::to_string(std::abs(p)) +
                                        " >= 1");

    // controllability matrix [B, AB, ..., A^{n-1}B]
    Matrix ctrb(n, n);
    Matrix col = b;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) ctrb(i, j) = col[i];
        col = a * col;
    }

    // w^T = e_n^T C^{-1}  via  C^T w = e_n
    Matrix en(n, 1);
    en[n - 1] = 1.0;
    Matrix w(0, 0);
    try {
        Matrix ct = ctrb.transpose();
        const auto perm = detail::lu_factor(ct, 1e-10, "place_poles_ackermann");
        w = detail::lu_solve(ct, perm, en);
    } catch (const SingularMatrix&) {
        throw NotControllable("place_poles_ackermann: controllability matrix singular");
    }

    // phi(A) for phi(z) = prod (z - p_i), evaluated by Horner in A
    std::vector<double> coeff = {1.0}; // leading coefficient
    for (double p : poles) {
        std::vector<double> next(coeff.size() + 1, 0.0);
        for (std::size_t i = 0; i < coeff.size(); ++i) {
            next[i] += coeff[i];
            next[i + 1] -= coeff[i] * p;
        }
        coeff = std::move(next);
    }
    Matrix phi = Matrix::identity(n) * coeff[0];
    for (std::size_t i = 1; i < coeff.size(); ++i) {
        phi = phi * a;
        for (std::size_t d = 0; d < n; ++d) phi(d, d) += coeff[i];
    }

    Matrix k(1, n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += w[i] * phi(i, j);
        k(0, j) = -s;
    }
    return k;
}

// The prestabilized loop x+ = A_K x + B v obtained from u = v + K x, with the
// steady-state map S_K, feasible steady-state input set S_v, its shrunk
// subset S_v_bar = beta S_v, and a certified decay envelope for A_K.
struct PrestabilizedSystem {
    LtiSystem base;
    Matrix K;
    Matrix A_K; // A + B K
    Matrix C;   // C0 + D0 K
    Matrix D;   // D0
    Matrix S_K; // (I - A_K)^{-1} B
    Polytope S_v;
    Polytope S_v_bar;
    DecayEnvelope envelope;
    double beta;

    std::size_t state_dim() const { return base.state_dim(); }
    std::size_t input_dim() const { return base.input_dim(); }
    std::size_t output_dim() const { return base.output_dim(); }
};

inline PrestabilizedSystem prestabilize(const LtiSystem& sys, const Matrix& k, double beta) {
    const std::size_t n = sys.state_dim();
    const std::size_t m = sys.input_dim();
    if (k.rows() != m || k.cols() != n)
        throw DimensionMismatch("prestabilize: K must be m x n");
    if (!(beta > 0.0) || !(beta < 1.0))
        throw InvalidBeta("prestabilize: beta = " + std::to_string(beta) + " not in (0, 1)");

    const Matrix a_k = sys.A + sys.B * k;
    const DecayEnvelope env = schur_decay_envelope(a_k); // throws NotSchurStable
    const Matrix c = sys.C0 + sys.D0 * k;
    const Matrix s_k = solve_linear(Matrix::identity(n) - a_k, sys.B);

    // S_v = {v : (C S_K + D) v in Y}, composed row by row with Y
    const Matrix w = c * s_k + sys.D0; // p x m steady-state output map
    std::vector<Halfspace> sv_rows;
    sv_rows.reserve(sys.Y.row_count());
    for (const auto& row : sys.Y.rows()) {
        Vector normal(m, 1);
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < w.rows(); ++i) s += row.normal[i] * w(i, j);
            normal[j] = s;
        }
        sv_rows.emplace_back(std::move(normal), row.offset);
    }
    Polytope s_v = remove_redundancy(Polytope(m, std::move(sv_rows)));
    try {
        axis_bounds(s_v);
    } catch (const Unbounded&) {
        throw Unbounded("prestabilize: S_v unbounded, Y does not constrain all steady-state inputs");
    }
    const auto [center, radius] = chebyshev_center(s_v);
    (void)center;
    if (radius <= 1e-12)
        throw EmptySteadyStateSet("prestabilize: S_v has empty interior (Chebyshev radius " +
                                  std::to_string(radius) + ")");
    Polytope s_v_bar = scale(s_v, beta);
    s_v_bar = s_v_bar.with_interior_point(chebyshev_center(s_v_bar).first);

    return PrestabilizedSystem{sys,   k,   a_k,     c,   sys.D0,
                               s_k,   std::move(s_v), std::move(s_v_bar), env, beta};
}

struct StepResult {
    Vector x_next;
    Vector u;
    Vector y;
};

// One plant step under the prestabilized input u = v + K x.
inline StepResult step(const PrestabilizedSystem& sys, const Vector& x, const Vector& v) {
    if (x.size() != sys.state_dim() || v.size() != sys.input_dim())
        throw DimensionMismatch("step: state/input dimension mismatch");
    StepResult out;
    out.u = v + sys.K * x;
    out.x_next = sys.A_K * x + sys.base.B * v;
    out.y = sys.base.C0 * x + sys.base.D0 * out.u;
    return out;
}

} // namespace ocorg
