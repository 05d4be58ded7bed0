#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ocorg/errors.hpp"
#include "ocorg/matrix.hpp"
#include "ocorg/polytope.hpp"
#include "ocorg/rng.hpp"
#include "ocorg/system.hpp"

namespace ocorg {

// The lambda-contractive maximal output admissible set of the augmented
// reference/error system
//     nu+  = nu,
//     chi+ = (1/lambda) A_K chi,
//     psi  = C chi + (C S_K + D) nu  in  Y,
// over joint coordinates (nu, chi) in R^{m+n}. The steady-state (limit) rows
// are tightened to (1 - epsilon) Y to force finite determination, so the set
// is an inner approximation of the exact MAS.
struct LambdaMas {
    double lambda = 0.95;
    Polytope set;                      // dim m + n
    std::size_t determination_index = 0; // k*
    double epsilon_tighten = 1e-6;
    std::size_t input_dim = 0;  // m
    std::size_t state_dim = 0;  // n
};

inline LambdaMas compute_lambda_mas(const PrestabilizedSystem& sys, double lambda,
                                    double epsilon_tighten = 1e-6, std::size_t max_horizon = 500) {
    const std::size_t n = sys.state_dim();
    const std::size_t m = sys.input_dim();
    if (!(lambda > 0.0) || !(lambda < 1.0))
        throw LambdaTooSmall("compute_lambda_mas: lambda = " + std::to_string(lambda) +
                             " not in (0, 1)");
    if (!(epsilon_tighten > 0.0) || epsilon_tighten > 0.1)
        throw InvalidEpsilon("compute_lambda_mas: epsilon_tighten = " +
                             std::to_string(epsilon_tighten) + " not in (0, 0.1]");

    const Matrix a_scaled = sys.A_K * (1.0 / lambda);
    try {
        solve_discrete_lyapunov(a_scaled);
    } catch (const NotSchurStable&) {
        throw LambdaTooSmall("compute_lambda_mas: A_K / lambda fails the Schur certificate, "
                             "lambda <= rho(A_K)");
    }

    const Matrix w = sys.C * sys.S_K + sys.D; // steady-state output map, p x m

    // joint row [g^T W | g^T C Phi_t] (nu, chi) <= off, for each Y row (g, off)
    const auto joint_row = [&](const Halfspace& yrow, const Matrix& c_phi, double off) {
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
        return Halfspace(std::move(normal), off);
    };

    std::vector<Halfspace> rows;
    const Matrix zero_cn(sys.output_dim(), n);
    for (const auto& yrow : sys.base.Y.rows()) {
        // tightened limit rows: (C S_K + D) nu in (1 - eps) Y
        Halfspace limit = joint_row(yrow, zero_cn, (1.0 - epsilon_tighten) * yrow.offset);
        if (max_abs(limit.normal) > 1e-14) rows.push_back(std::move(limit));
    }
    Matrix c_phi = sys.C; // C (A_K/lambda)^t, starting at t = 0
    for (const auto& yrow : sys.base.Y.rows()) {
        Halfspace r = joint_row(yrow, c_phi, yrow.offset);
        if (max_abs(r.normal) > 1e-14) rows.push_back(std::move(r));
    }

    std::size_t k_star = 0;
    bool determined = false;
    for (std::size_t t = 0; t < max_horizon; ++t) {
        c_phi = c_phi * a_scaled; // now C (A_K/lambda)^{t+1}
        const Polytope current(m + n, rows);
        std::vector<Halfspace> fresh;
        bool all_redundant = true;
        for (const auto& yrow : sys.base.Y.rows()) {
            Halfspace cand = joint_row(yrow, c_phi, yrow.offset);
            if (max_abs(cand.normal) <= 1e-14) continue; // trivially satisfied
            const LpSolution sol = try_lp_solve(cand.normal, current);
            const bool redundant =
                sol.status == LpStatus::Optimal && sol.value <= cand.offset + 1e-9;
            if (!redundant) {
                all_redundant = false;
                fresh.push_back(std::move(cand));
            }
        }
        if (all_redundant) {
            k_star = t;
            determined = true;
            break;
        }
        for (auto& r : fresh) rows.push_back(std::move(r));
    }
    if (!determined)
        throw HorizonExceeded("compute_lambda_mas: no determination within " +
                              std::to_string(max_horizon) +
                              " steps; epsilon_tighten too small or lambda too close to rho(A_K)");

    Polytope set = remove_redundancy(Polytope(m + n, std::move(rows)));

    // The tightened limit rows must not cut into S_v_bar, otherwise the
    // governor could be handed references it can never reach.
    for (const auto& yrow : sys.base.Y.rows()) {
        Vector normal(m, 1);
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < w.rows(); ++i) s += yrow.normal[i] * w(i, j);
            normal[j] = s;
        }
        if (max_abs(normal) <= 1e-14) continue;
        if (support(sys.S_v_bar, normal) >= (1.0 - epsilon_tighten) * yrow.offset)
            throw Error("compute_lambda_mas: S_v_bar not strictly inside the tightened limit set; "
                        "decrease beta or epsilon_tighten");
    }

    return LambdaMas{lambda, std::move(set), k_star, epsilon_tighten, m, n};
}

inline bool mas_contains(const LambdaMas& mas, const Vector& v, const Vector& e) {
    if (v.size() != mas.input_dim || e.size() != mas.state_dim)
        throw DimensionMismatch("mas_contains: expected (m, n) = (" +
                                std::to_string(mas.input_dim) + ", " +
                                std::to_string(mas.state_dim) + ")");
    return contains(mas.set, vstack(v, e), 1e-9);
}

struct InvarianceReport {
    std::size_t samples = 0;
    std::size_t contraction_failures = 0; // (v, (1/lambda) A_K e) left the set
    std::size_t constraint_failures = 0;  // y_t left Y during the frozen run
    double worst_contraction_margin = 0.0; // most positive row violation seen
    double worst_constraint_margin = 0.0;
};

// Sampling check of the contractive-invariance and constraint-satisfaction
// properties of the set: report-only, used as a test obligation.
inline InvarianceReport verify_invariance(const LambdaMas& mas, const PrestabilizedSystem& sys,
                                  std::size_t samples, std::uint64_t seed = 42) {
    const std::size_t m = mas.input_dim;
    const std::size_t n = mas.state_dim;
    InvarianceReport report;
    const auto [lo, hi] = axis_bounds(mas.set);
    SplitMix64 rng(seed);
    const Matrix a_scaled = sys.A_K * (1.0 / mas.lambda);
    std::size_t guard = 0;
    while (report.samples < samples && guard < samples * 10000) {
        ++guard;
        Vector z(m + n, 1);
        for (std::size_t i = 0; i < m + n; ++i) z[i] = rng.uniform(lo[i], hi[i]);
        if (!contains(mas.set, z)) continue;
        ++report.samples;
        Vector v(m, 1), e(n, 1);
        for (std::size_t i = 0; i < m; ++i) v[i] = z[i];
        for (std::size_t i = 0; i < n; ++i) e[i] = z[m + i];

        // (i) image under (nu, chi) -> (nu, (1/lambda) A_K chi) stays inside
        const Vector image = vstack(v, a_scaled * e);
        double margin = 0.0;
        for (const auto& row : mas.set.rows())
            margin = std::max(margin, dot(row.normal, image) - row.offset);
        if (margin > 1e-9) ++report.contraction_failures;
        report.worst_contraction_margin = std::max(report.worst_contraction_margin, margin);

        // (ii) frozen-reference rollout from x0 = e + S_K v keeps y in Y
        Vector x = e + sys.S_K * v;
        double cmargin = 0.0;
        for (int t = 0; t < 100; ++t) {
            const auto s = step(sys, x, v);
            for (const auto& row : sys.base.Y.rows())
                cmargin = std::max(cmargin, dot(row.normal, s.y) - row.offset);
            x = s.x_next;
        }
        if (cmargin > 1e-9) ++report.constraint_failures;
        report.worst_constraint_margin = std::max(report.worst_constraint_margin, cmargin);
    }
    return report;
}

} // namespace ocorg
