#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "ocorg/cost.hpp"
#include "ocorg/errors.hpp"
#include "ocorg/mas.hpp"
#include "ocorg/matrix.hpp"
#include "ocorg/polytope.hpp"
#include "ocorg/system.hpp"

namespace ocorg {

// Internal state of the OCO-RG loop: the gradient-tracked reference estimate
// r, the governed reference v actually applied, and the last line-search
// value. r stays in S_v_bar by projection; (v, x - S_K v) stays in the MAS
// by construction of the line search.
struct ControllerState {
    Vector r;
    Vector v;
    double alpha_last = 1.0;
    std::uint64_t t = 0;
};

struct ControllerConfig {
    double gamma = 0.1;
    LambdaMas mas;
    PrestabilizedSystem sys;
    // Step-size bound 2/(alpha_v + l_v) for the configured cost family;
    // informational: exceeding it is legal but voids the contraction rate.
    double step_bound = 0.0;

    bool gamma_within_bound() const { return step_bound <= 0.0 || gamma <= step_bound + 1e-12; }
};

inline ControllerConfig make_controller_config(PrestabilizedSystem sys, LambdaMas mas, double gamma,
                                               double q_lo, double q_hi) {
    if (!(gamma > 0.0))
        throw Error("make_controller_config: gamma must be positive");
    ControllerConfig cfg{gamma, std::move(mas), std::move(sys), 0.0};
    cfg.step_bound = convexity_bounds(cfg.sys, q_lo, q_hi).step_bound;
    return cfg;
}

// The feasible-initialization requirement: r0 in S_v and the joint point
// (r0, x0 - S_K r0) inside the MAS.
inline bool check_initial_feasibility(const ControllerConfig& cfg, const Vector& r0,
                                      const Vector& x0) {
    if (r0.size() != cfg.sys.input_dim() || x0.size() != cfg.sys.state_dim())
        throw DimensionMismatch("check_initial_feasibility: dimension mismatch");
    return contains(cfg.sys.S_v, r0) && mas_contains(cfg.mas, r0, x0 - cfg.sys.S_K * r0);
}

// t = 0 bootstrap: alpha_0 = 1, v_0 = r_0. Refuses infeasible starts.
inline ControllerState make_initial_state(const ControllerConfig& cfg, const Vector& r0,
                                          const Vector& x0) {
    if (!check_initial_feasibility(cfg, r0, x0))
        throw InfeasibleInitialization(
            "make_initial_state: (r0, x0 - S_K r0) violates the feasible-initialization "
            "requirement");
    return ControllerState{r0, r0, 1.0, 0};
}

// One projected-gradient step on the previous steady-state cost:
// r+ = Pi_{S_v_bar}(r - gamma * grad_prev).
inline Vector ogd_step(const ControllerConfig& cfg, const ControllerState& state,
                       const Vector& grad_prev) {
    if (grad_prev.size() != cfg.sys.input_dim())
        throw DimensionMismatch("ogd_step: gradient dimension mismatch");
    return project(cfg.sys.S_v_bar, state.r - cfg.gamma * grad_prev);
}

struct LineSearchResult {
    double alpha = 1.0;
    Vector v_next;
};

// Exact reference-governor line search: maximize alpha in [0,1] subject to
// (v(alpha), x - S_K v(alpha)) in the MAS, v(alpha) = v + alpha (r_new - v).
// The joint point is affine in alpha, so each MAS row yields a ratio bound
// and the maximizer is the row-wise minimum.
inline LineSearchResult rg_line_search(const ControllerConfig& cfg, const ControllerState& state,
                                       const Vector& x, const Vector& r_new) {
    const Vector d = r_new - state.v;
    const Vector z0 = vstack(state.v, x - cfg.sys.S_K * state.v);
    const Vector dz = vstack(d, -(cfg.sys.S_K * d));

    // recursive-feasibility invariant: the current point must already be admissible
    if (!contains(cfg.mas.set, z0, 1e-7))
        throw InfeasibleCurrentPoint(
            "rg_line_search: (v, x - S_K v) left the admissible set, controller state corrupt");

    double alpha = 1.0;
    for (const auto& row : cfg.mas.set.rows()) {
        const double slope = dot(row.normal, dz);
        if (slope <= 1e-12) continue; // row never binds along the segment
        double a_row = (row.offset - dot(row.normal, z0)) / slope;
        if (a_row < 0.0) a_row = 0.0; // roundoff from z0 sitting on this row's boundary
        alpha = std::min(alpha, a_row);
    }
    LineSearchResult out;
    out.alpha = alpha;
    out.v_next = state.v + alpha * d;
    return out;
}

struct ControllerStepResult {
    Vector u;
    ControllerState state;
};

// One full loop iteration (t >= 1): gradient step, governor line search, and
// the applied input u = v + K x.
inline ControllerStepResult controller_step(const ControllerConfig& cfg,
                                            const ControllerState& state, const Vector& x,
                                            const Vector& grad_prev) {
    const Vector r_next = ogd_step(cfg, state, grad_prev);
    const LineSearchResult ls = rg_line_search(cfg, state, x, r_next);
    ControllerStepResult out;
    out.u = ls.v_next + cfg.sys.K * x;
    out.state = ControllerState{r_next, ls.v_next, ls.alpha, state.t + 1};
    return out;
}

} // namespace ocorg
