#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ocorg/errors.hpp"
#include "ocorg/matrix.hpp"
#include "ocorg/polytope.hpp"
#include "ocorg/rng.hpp"
#include "ocorg/system.hpp"

namespace ocorg {

// Stage cost L(u, x) = 1/2 ||x - x_target||^2 + (q/2) ||u||^2.
struct QuadraticTrackingCost {
    Vector x_target;
    double q = 0.0;
};

inline double eval_cost(const QuadraticTrackingCost& cost, const Vector& u, const Vector& x) {
    if (x.size() != cost.x_target.size())
        throw DimensionMismatch("eval_cost: state dimension mismatch");
    const Vector d = x - cost.x_target;
    return 0.5 * dot(d, d) + 0.5 * cost.q * dot(u, u);
}

// Gradient of the steady-state restriction L^s(v) = L(v + K S_K v, S_K v):
// grad = S_K^T (S_K v - x_target) + q M^T M v with M = I + K S_K.
inline Vector steady_gradient(const PrestabilizedSystem& sys, const QuadraticTrackingCost& cost,
                              const Vector& v) {
    if (v.size() != sys.input_dim() || cost.x_target.size() != sys.state_dim())
        throw DimensionMismatch("steady_gradient: dimension mismatch");
    const Matrix m_map = Matrix::identity(sys.input_dim()) + sys.K * sys.S_K;
    return sys.S_K.transpose() * (sys.S_K * v - cost.x_target) +
           cost.q * (m_map.transpose() * (m_map * v));
}

// Hessian of L^s together with its eigenvalue extremes (the strong-convexity
// and smoothness constants of the steady-state cost).
struct SteadyCostModel {
    Matrix hessian;
    double alpha_v = 0.0;
    double l_v = 0.0;
};

inline SteadyCostModel steady_cost_model(const PrestabilizedSystem& sys, double q) {
    const Matrix m_map = Matrix::identity(sys.input_dim()) + sys.K * sys.S_K;
    SteadyCostModel model;
    model.hessian = sys.S_K.transpose() * sys.S_K + q * (m_map.transpose() * m_map);
    const auto [lo, hi] = sym_eig_extremes(model.hessian);
    model.alpha_v = lo;
    model.l_v = hi;
    if (model.alpha_v <= 1e-12)
        throw NotStronglyConvex("steady_cost_model: lambda_min(hessian) = " +
                                std::to_string(model.alpha_v));
    return model;
}

// Worst-case convexity constants over an input-weight interval. The Hessian
// is monotone in q in the semidefinite order, so the extremes sit at the
// interval ends.
struct ConvexityBounds {
    double alpha_v_min = 0.0;
    double l_v_max = 0.0;
    double step_bound = 0.0; // 2 / (alpha_v_min + l_v_max)

    double kappa(double gamma) const { return 1.0 - gamma * alpha_v_min; }
};

inline ConvexityBounds convexity_bounds(const PrestabilizedSystem& sys, double q_lo, double q_hi) {
    if (q_lo > q_hi) std::swap(q_lo, q_hi);
    ConvexityBounds out;
    out.alpha_v_min = steady_cost_model(sys, q_lo).alpha_v;
    out.l_v_max = steady_cost_model(sys, q_hi).l_v;
    out.step_bound = 2.0 / (out.alpha_v_min + out.l_v_max);
    return out;
}

struct SteadyOptimum {
    Vector eta;   // optimal steady-state reference in S_v_bar
    Vector theta; // corresponding steady state S_K eta
};

// Solves min L^s(v) over S_v_bar by projected gradient with the optimal
// fixed step 2/(alpha_v + l_v), started from 0.
inline SteadyOptimum optimal_steady_reference(const PrestabilizedSystem& sys,
                                              const QuadraticTrackingCost& cost,
                                              double tol = 1e-11,
                                              std::size_t max_iter = 100000) {
    const SteadyCostModel model = steady_cost_model(sys, cost.q);
    const double gamma = 2.0 / (model.alpha_v + model.l_v);
    Vector v(sys.input_dim(), 1);
    for (std::size_t it = 0; it < max_iter; ++it) {
        const Vector next = project(sys.S_v_bar, v - gamma * steady_gradient(sys, cost, v));
        const double moved = norm2(next - v);
        v = next;
        if (moved <= tol) return SteadyOptimum{v, sys.S_K * v};
    }
    throw IterationLimit("optimal_steady_reference: no convergence within " +
                         std::to_string(max_iter) + " iterations");
}

// Time-varying cost generator of the numerical experiment: a piecewise
// constant target level and input weight, each resampled with a fixed
// probability per step, plus a slow sine on the target. The scalar target
// level is broadcast to every state coordinate.
struct ScheduleParams {
    std::uint64_t seed = 0;
    double switch_probability = 0.01;
    double q_lo = 0.0, q_hi = 2.0;
    double z_lo = -1.0, z_hi = 1.0;
    double sine_amplitude = 0.2;
    double sine_period = 200.0; // steps per full cycle
};

// Draw order (fixed for reproducibility): construction draws q then z from
// their ranges; each advance draws one uniform for the q switch (plus one for
// the new q when it fires), then the same for z.
class CostSchedule {
public:
    CostSchedule(const ScheduleParams& params, std::size_t state_dim)
        : params_(params), state_dim_(state_dim), rng_(params.seed) {
        q_ = rng_.uniform(params_.q_lo, params_.q_hi);
        zbar_ = rng_.uniform(params_.z_lo, params_.z_hi);
    }

    // Cost for the current step, then advances the parameter process.
    QuadraticTrackingCost next() {
        QuadraticTrackingCost cost = peek();
        ++t_;
        if (rng_.uniform01() < params_.switch_probability)
            q_ = rng_.uniform(params_.q_lo, params_.q_hi);
        if (rng_.uniform01() < params_.switch_probability)
            zbar_ = rng_.uniform(params_.z_lo, params_.z_hi);
        return cost;
    }

    QuadraticTrackingCost peek() const {
        const double level =
            zbar_ + params_.sine_amplitude *
                        std::sin(2.0 * 3.141592653589793238462643383279502884 *
                                 static_cast<double>(t_) / params_.sine_period);
        Vector target(state_dim_, 1);
        for (std::size_t i = 0; i < state_dim_; ++i) target[i] = level;
        return QuadraticTrackingCost{std::move(target), q_};
    }

    std::uint64_t step_index() const { return t_; }
    const ScheduleParams& params() const { return params_; }

private:
    ScheduleParams params_;
    std::size_t state_dim_;
    SplitMix64 rng_;
    double q_ = 0.0;
    double zbar_ = 0.0;
    std::uint64_t t_ = 0;
};

namespace detail {

// Component-wise sups of |u_i| and |x_j| over Z = {(u,x): C0 x + D0 u in Y}.
// Returns infinity components when Z is unbounded in that coordinate.
inline std::pair<Vector, Vector> z_axis_sups(const PrestabilizedSystem& sys) {
    const std::size_t n = sys.state_dim();
    const std::size_t m = sys.input_dim();
    std::vector<Halfspace> rows;
    rows.reserve(sys.base.Y.row_count());
    for (const auto& yrow : sys.base.Y.rows()) {
        Vector normal(m + n, 1);
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < sys.base.D0.rows(); ++i)
                s += yrow.normal[i] * sys.base.D0(i, j);
            normal[j] = s;
        }
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < sys.base.C0.rows(); ++i)
                s += yrow.normal[i] * sys.base.C0(i, j);
            normal[m + j] = s;
        }
        if (max_abs(normal) > 1e-14) rows.emplace_back(std::move(normal), yrow.offset);
    }
    const Polytope z_set(m + n, std::move(rows));
    Vector u_sup(m, 1), x_sup(n, 1);
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m + n; ++i) {
        Vector e(m + n, 1);
        e[i] = 1.0;
        double hi, lo;
        try {
            hi = support(z_set, e);
            e[i] = -1.0;
            lo = support(z_set, e);
        } catch (const Unbounded&) {
            hi = inf;
            lo = inf;
        }
        const double sup = std::max(std::abs(hi), std::abs(lo));
        if (i < m)
            u_sup[i] = sup;
        else
            x_sup[i - m] = sup;
    }
    return {u_sup, x_sup};
}

inline double lipschitz_from_sups(const Vector& u_sup, const Vector& x_sup, double q_max,
                                  const Vector& xbar_sup) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u_sup.size(); ++i) {
        const double gi = q_max * u_sup[i];
        acc += gi * gi;
    }
    for (std::size_t j = 0; j < x_sup.size(); ++j) {
        const double gj = x_sup[j] + xbar_sup[j];
        acc += gj * gj;
    }
    return std::sqrt(acc);
}

} // namespace detail

// Conservative Lipschitz constant of the stage cost over the constrained
// (u, x) set: the gradient (q u, x - x_target) is bounded component-wise by
// support functions of Y and the schedule's parameter ranges.
inline double lipschitz_estimate(const PrestabilizedSystem& sys, const ScheduleParams& params) {
    const auto [u_sup, x_sup] = detail::z_axis_sups(sys);
    const double xbar = std::max(std::abs(params.z_lo), std::abs(params.z_hi)) +
                        std::abs(params.sine_amplitude);
    Vector xbar_sup(sys.state_dim(), 1);
    for (std::size_t i = 0; i < sys.state_dim(); ++i) xbar_sup[i] = xbar;
    return detail::lipschitz_from_sups(u_sup, x_sup, std::max(params.q_lo, params.q_hi), xbar_sup);
}

inline double lipschitz_estimate(const PrestabilizedSystem& sys, const QuadraticTrackingCost& frozen) {
    const auto [u_sup, x_sup] = detail::z_axis_sups(sys);
    Vector xbar_sup(sys.state_dim(), 1);
    for (std::size_t i = 0; i < sys.state_dim(); ++i) xbar_sup[i] = std::abs(frozen.x_target[i]);
    return detail::lipschitz_from_sups(u_sup, x_sup, frozen.q, xbar_sup);
}

} // namespace ocorg
