#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "ocorg/controller.hpp"
#include "ocorg/cost.hpp"
#include "ocorg/errors.hpp"
#include "ocorg/matrix.hpp"
#include "ocorg/system.hpp"

namespace ocorg {

struct StepRecord {
    std::uint64_t t = 0;
    Vector x, u, y, v, r, eta, theta;
    double alpha = 1.0;
    double stage_cost = 0.0;
    double benchmark_cost = 0.0;
    double constraint_margin = 0.0; // max row violation of y in Y; <= 0 is satisfied
};

struct SimulationTrace {
    std::size_t state_dim = 0, input_dim = 0, output_dim = 0;
    std::vector<StepRecord> steps; // T + 1 records, t = 0..T
};

// Supplies L_0, L_1, ... one per call, in order.
using CostSource = std::function<QuadraticTrackingCost()>;

inline CostSource schedule_cost_source(CostSchedule schedule) {
    return [schedule]() mutable { return schedule.next(); };
}

inline CostSource frozen_cost_source(QuadraticTrackingCost cost) {
    return [cost]() { return cost; };
}

namespace detail {

inline double constraint_margin(const Polytope& y_set, const Vector& y) {
    double margin = -std::numeric_limits<double>::infinity();
    for (const auto& row : y_set.rows())
        margin = std::max(margin, dot(row.normal, y) - row.offset);
    return margin;
}

inline double benchmark_cost(const PrestabilizedSystem& sys, const QuadraticTrackingCost& cost,
                             const SteadyOptimum& opt) {
    // L^s(eta) = L(eta + K theta, theta)
    return eval_cost(cost, opt.eta + sys.K * opt.theta, opt.theta);
}

} // namespace detail

// Runs the t = 0 bootstrap followed by T controller/plant steps, recording
// the full per-step trace including the per-step optimal steady-state
// benchmark. The cost source is polled exactly T + 1 times.
inline SimulationTrace run_closed_loop(const ControllerConfig& cfg, const Vector& x0,
                                       const Vector& r0, CostSource costs, std::uint64_t horizon) {
    if (horizon < 1)
        throw Error("run_closed_loop: T must be >= 1");
    const PrestabilizedSystem& sys = cfg.sys;
    SimulationTrace trace;
    trace.state_dim = sys.state_dim();
    trace.input_dim = sys.input_dim();
    trace.output_dim = sys.output_dim();
    trace.steps.reserve(horizon + 1);

    ControllerState state = make_initial_state(cfg, r0, x0); // throws InfeasibleInitialization

    QuadraticTrackingCost cost = costs();
    Vector x = x0;
    {
        const auto plant = step(sys, x, state.v);
        const auto opt = optimal_steady_reference(sys, cost);
        StepRecord rec;
        rec.t = 0;
        rec.x = x;
        rec.u = plant.u;
        rec.y = plant.y;
        rec.v = state.v;
        rec.r = state.r;
        rec.eta = opt.eta;
        rec.theta = opt.theta;
        rec.alpha = 1.0;
        rec.stage_cost = eval_cost(cost, plant.u, x);
        rec.benchmark_cost = detail::benchmark_cost(sys, cost, opt);
        rec.constraint_margin = detail::constraint_margin(sys.base.Y, plant.y);
        trace.steps.push_back(std::move(rec));
        x = plant.x_next;
    }

    for (std::uint64_t t = 1; t <= horizon; ++t) {
        QuadraticTrackingCost prev_cost = cost;
        cost = costs();
        const Vector grad_prev = steady_gradient(sys, prev_cost, state.r);
        ControllerStepResult res;
        try {
            res = controller_step(cfg, state, x, grad_prev);
        } catch (const Error& e) {
            throw Error("run_closed_loop: step " + std::to_string(t) + ": " + e.what());
        }
        state = res.state;
        const auto plant = step(sys, x, state.v);
        const auto opt = optimal_steady_reference(sys, cost);
        StepRecord rec;
        rec.t = t;
        rec.x = x;
        rec.u = plant.u;
        rec.y = plant.y;
        rec.v = state.v;
        rec.r = state.r;
        rec.eta = opt.eta;
        rec.theta = opt.theta;
        rec.alpha = state.alpha_last;
        rec.stage_cost = eval_cost(cost, plant.u, x);
        rec.benchmark_cost = detail::benchmark_cost(sys, cost, opt);
        rec.constraint_margin = detail::constraint_margin(sys.base.Y, plant.y);
        trace.steps.push_back(std::move(rec));
        x = plant.x_next;
    }
    return trace;
}

// Accumulated closed-loop cost minus the per-step optimal steady-state cost.
inline double dynamic_regret(const SimulationTrace& trace) {
    double r = 0.0;
    for (const auto& s : trace.steps) r += s.stage_cost - s.benchmark_cost;
    return r;
}

// Total variation of the optimal steady-state reference, summed from t = 1.
inline double path_length(const SimulationTrace& trace) {
    double s = 0.0;
    for (std::size_t t = 1; t < trace.steps.size(); ++t)
        s += norm2(trace.steps[t].eta - trace.steps[t - 1].eta);
    return s;
}

inline double min_alpha(const SimulationTrace& trace) {
    double a = 1.0;
    for (const auto& s : trace.steps) a = std::min(a, s.alpha);
    return a;
}

inline double max_constraint_margin(const SimulationTrace& trace) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& s : trace.steps) m = std::max(m, s.constraint_margin);
    return m;
}

struct RegretBoundConstants {
    double k_x = 0.0;      // l_L ||[K; I]||
    double k_v = 0.0;      // l_L ||[K S_K + I; S_K]||
    double k_x_tilde = 0.0; // k_x c ||S_K||
    double eps_kappa = 0.0; // epsilon_hat (1 - kappa)
    double K_0_theta = 0.0;
    double K_0_eta = 0.0;
    double K_eta = 0.0;
    double K_0 = 0.0;
};

// Diagnostic constants of the linear-in-path-length regret bound, evaluated
// with the certified decay envelope and the supplied contraction and
// line-search floors.
inline RegretBoundConstants regret_bound_constants(const PrestabilizedSystem& sys, double l_L,
                                                   double kappa, double epsilon_hat,
                                                   const Vector& x0, const Vector& theta0,
                                                   const Vector& v0, const Vector& eta0) {
    if (!(epsilon_hat > 0.0) || epsilon_hat > 1.0)
        throw InvalidEpsilon("regret_bound_constants: epsilon_hat = " +
                             std::to_string(epsilon_hat) + " not in (0, 1]");
    if (!(kappa >= 0.0) || !(kappa < 1.0))
        throw Error("regret_bound_constants: kappa = " + std::to_string(kappa) + " not in [0, 1)");
    const std::size_t n = sys.state_dim();
    const std::size_t m = sys.input_dim();
    const double c = sys.envelope.c;
    const double sigma = sys.envelope.sigma;

    RegretBoundConstants out;
    out.k_x = l_L * spectral_norm(vstack(sys.K, Matrix::identity(n)));
    out.k_v = l_L * spectral_norm(vstack(sys.K * sys.S_K + Matrix::identity(m), sys.S_K));
    out.k_x_tilde = out.k_x * c * spectral_norm(sys.S_K);
    out.eps_kappa = epsilon_hat * (1.0 - kappa);
    out.K_0_theta = out.k_x * c / (1.0 - sigma);
    out.K_0_eta = (2.0 * out.k_x_tilde * (1.0 + out.eps_kappa) + out.k_v * (1.0 - sigma)) /
                  (out.eps_kappa * (1.0 - sigma));
    out.K_eta = (out.k_x_tilde * (2.0 + out.eps_kappa) + out.k_v * (1.0 - sigma)) /
                (out.eps_kappa * (1.0 - sigma));
    out.K_0 = out.K_0_theta * norm2(x0 - theta0) + out.K_0_eta * norm2(v0 - eta0);
    return out;
}

struct RegretReport {
    double regret = 0.0;
    double path_length = 0.0;
    double ratio = 0.0; // regret / path_length, NaN when the path is empty
    double epsilon_hat = 1.0;
    double kappa = 0.0;
    bool bound_valid = false; // kappa in [0,1), so the constants are defined
    RegretBoundConstants constants;
    double bound_value = 0.0; // K_0 + K_eta * path length
    bool bound_holds = false;
};

// Assembles the regret diagnostics. When kappa falls outside [0,1) — the
// step size exceeds the admissible bound for the cost family — the bound
// side is reported as invalid instead of being evaluated.
inline RegretReport build_regret_report(const SimulationTrace& trace,
                                        const PrestabilizedSystem& sys, double l_L, double kappa) {
    RegretReport report;
    report.regret = dynamic_regret(trace);
    report.path_length = path_length(trace);
    report.ratio = report.path_length > 0.0 ? report.regret / report.path_length
                                            : std::numeric_limits<double>::quiet_NaN();
    report.epsilon_hat = min_alpha(trace);
    report.kappa = kappa;
    report.bound_valid = kappa >= 0.0 && kappa < 1.0;
    if (report.bound_valid) {
        const auto& first = trace.steps.front();
        report.constants = regret_bound_constants(sys, l_L, kappa, report.epsilon_hat, first.x,
                                                  first.theta, first.v, first.eta);
        report.bound_value = report.constants.K_0 + report.constants.K_eta * report.path_length;
        report.bound_holds = report.regret <= report.bound_value + 1e-6;
    } else {
        report.bound_value = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

// CSV trace, floating point at 17 significant digits so values round-trip.
inline void write_trace_csv(const SimulationTrace& trace, std::ostream& os) {
    const auto emit_header = [&](const char* base, std::size_t count) {
        for (std::size_t i = 1; i <= count; ++i) os << ',' << base << '_' << i;
    };
    os << 't';
    emit_header("x", trace.state_dim);
    emit_header("u", trace.input_dim);
    emit_header("v", trace.input_dim);
    emit_header("r", trace.input_dim);
    os << ",alpha";
    emit_header("eta", trace.input_dim);
    os << ",stage_cost,benchmark_cost,constraint_margin\n";

    char buf[40];
    const auto emit = [&](double value) {
        std::snprintf(buf, sizeof buf, "%.17g", value);
        os << ',' << buf;
    };
    for (const auto& s : trace.steps) {
        os << s.t;
        for (std::size_t i = 0; i < trace.state_dim; ++i) emit(s.x[i]);
        for (std::size_t i = 0; i < trace.input_dim; ++i) emit(s.u[i]);
        for (std::size_t i = 0; i < trace.input_dim; ++i) emit(s.v[i]);
        for (std::size_t i = 0; i < trace.input_dim; ++i) emit(s.r[i]);
        emit(s.alpha);
        for (std::size_t i = 0; i < trace.input_dim; ++i) emit(s.eta[i]);
        emit(s.stage_cost);
        emit(s.benchmark_cost);
        emit(s.constraint_margin);
        os << '\n';
    }
}

} // namespace ocorg
