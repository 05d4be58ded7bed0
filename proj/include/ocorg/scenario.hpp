#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ocorg/controller.hpp"
#include "ocorg/cost.hpp"
#include "ocorg/errors.hpp"
#include "ocorg/mas.hpp"
#include "ocorg/matrix.hpp"
#include "ocorg/polytope.hpp"
#include "ocorg/rng.hpp"
#include "ocorg/sim.hpp"
#include "ocorg/system.hpp"

namespace ocorg {

using nlohmann::json;

// Cost block: either a frozen tracking cost or a seeded schedule.
struct CostSpec {
    bool frozen = false;
    QuadraticTrackingCost frozen_cost;
    ScheduleParams schedule;

    CostSource make_source(std::size_t state_dim) const {
        if (frozen) return frozen_cost_source(frozen_cost);
        return schedule_cost_source(CostSchedule(schedule, state_dim));
    }

    std::pair<double, double> q_range() const {
        if (frozen) return {frozen_cost.q, frozen_cost.q};
        return {schedule.q_lo, schedule.q_hi};
    }

    double lipschitz(const PrestabilizedSystem& sys) const {
        return frozen ? lipschitz_estimate(sys, frozen_cost) : lipschitz_estimate(sys, schedule);
    }
};

// Parsed and shape-checked scenario; defaults already resolved.
struct ScenarioConfig {
    Matrix A, B;
    bool box_shorthand = true;
    double state_bound = 1.0, input_bound = 1.0;
    Matrix C0, D0; // when !box_shorthand
    Matrix Y_H;
    Vector Y_h;

    bool has_K = false;
    Matrix K;
    std::vector<double> poles;

    double lambda = 0.95;
    double gamma = 0.1;
    double beta = 0.95;
    double epsilon_tighten = 1e-6;
    std::size_t max_horizon = 500;
    Vector r0; // sized at build time when empty
    Vector x0;

    CostSpec cost;

    std::uint64_t T = 1000;
    bool include_mas_in_summary = false;
    std::string trace_path, summary_path;

    json meta = json::object();
};

namespace detail {

inline void check_keys(const json& obj, const std::vector<std::string>& allowed,
                       const std::string& ctx) {
    if (!obj.is_object()) throw ConfigError(ctx + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const auto& a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError(ctx + ": unknown key '" + key + "'");
    }
}

inline Matrix parse_matrix(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ConfigError(ctx + ": expected a nested array (row-major matrix)");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].size();
    std::vector<double> entries;
    entries.reserve(rows * cols);
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != cols)
            throw ConfigError(ctx + ": ragged matrix rows");
        for (const auto& v : row) {
            if (!v.is_number()) throw ConfigError(ctx + ": non-numeric entry");
            entries.push_back(v.get<double>());
        }
    }
    try {
        return Matrix(rows, cols, std::move(entries));
    } catch (const Error& e) {
        throw ConfigError(ctx + ": " + e.what());
    }
}

inline Vector parse_vector(const json& j, const std::string& ctx) {
    if (!j.is_array()) throw ConfigError(ctx + ": expected an array");
    std::vector<double> entries;
    entries.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError(ctx + ": non-numeric entry");
        entries.push_back(v.get<double>());
    }
    return Matrix::column(std::move(entries));
}

inline double parse_number(const json& j, const std::string& ctx) {
    if (!j.is_number()) throw ConfigError(ctx + ": expected a number");
    return j.get<double>();
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (std::size_t i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

} // namespace detail

inline ScenarioConfig parse_scenario(const json& doc) {
    using detail::check_keys;
    using detail::parse_matrix;
    using detail::parse_number;
    using detail::parse_vector;

    check_keys(doc, {"system", "controller", "cost", "run", "meta"}, "config");
    if (!doc.contains("system") || !doc.contains("controller") || !doc.contains("cost") ||
        !doc.contains("run"))
        throw ConfigError("config: system, controller, cost, and run blocks are required");

    ScenarioConfig cfg;

    // --- system ---
    const json& sys = doc["system"];
    check_keys(sys, {"A", "B", "C0", "D0", "Y", "state_bound", "input_bound"}, "system");
    if (!sys.contains("A") || !sys.contains("B"))
        throw ConfigError("system: A and B are required");
    cfg.A = parse_matrix(sys["A"], "system.A");
    cfg.B = parse_matrix(sys["B"], "system.B");
    const std::size_t n = cfg.A.rows();
    const std::size_t m = cfg.B.cols();
    if (cfg.A.cols() != n || cfg.B.rows() != n)
        throw ConfigError("system: A must be n x n and B must be n x m");

    const bool has_box = sys.contains("state_bound") || sys.contains("input_bound");
    const bool has_explicit = sys.contains("C0") || sys.contains("D0") || sys.contains("Y");
    if (has_box && has_explicit)
        throw ConfigError("system: give either state_bound/input_bound or C0/D0/Y, not both");
    if (has_box) {
        cfg.box_shorthand = true;
        cfg.state_bound = sys.contains("state_bound")
                              ? parse_number(sys["state_bound"], "system.state_bound")
                              : 1.0;
        cfg.input_bound = sys.contains("input_bound")
                              ? parse_number(sys["input_bound"], "system.input_bound")
                              : 1.0;
        if (cfg.state_bound <= 0.0 || cfg.input_bound <= 0.0)
            throw ConfigError("system: bounds must be positive");
    } else if (has_explicit) {
        if (!sys.contains("C0") || !sys.contains("D0") || !sys.contains("Y"))
            throw ConfigError("system: C0, D0, and Y must be given together");
        cfg.box_shorthand = false;
        cfg.C0 = parse_matrix(sys["C0"], "system.C0");
        cfg.D0 = parse_matrix(sys["D0"], "system.D0");
        check_keys(sys["Y"], {"H", "h"}, "system.Y");
        if (!sys["Y"].contains("H") || !sys["Y"].contains("h"))
            throw ConfigError("system.Y: H and h are required");
        cfg.Y_H = parse_matrix(sys["Y"]["H"], "system.Y.H");
        cfg.Y_h = parse_vector(sys["Y"]["h"], "system.Y.h");
        if (cfg.C0.cols() != n || cfg.D0.rows() != cfg.C0.rows() || cfg.D0.cols() != m ||
            cfg.Y_H.cols() != cfg.C0.rows() || cfg.Y_H.rows() != cfg.Y_h.size())
            throw ConfigError("system: inconsistent C0/D0/Y shapes");
    } else {
        cfg.box_shorthand = true; // default unit box over (x, u)
    }

    // --- controller ---
    const json& ctl = doc["controller"];
    check_keys(ctl,
               {"K", "poles", "lambda", "gamma", "beta", "epsilon_tighten", "max_horizon", "r0"},
               "controller");
    if (ctl.contains("K") == ctl.contains("poles"))
        throw ConfigError("controller: exactly one of K or poles is required");
    if (ctl.contains("K")) {
        cfg.has_K = true;
        cfg.K = parse_matrix(ctl["K"], "controller.K");
        if (cfg.K.rows() != m || cfg.K.cols() != n)
            throw ConfigError("controller.K: must be m x n");
    } else {
        if (m != 1) throw ConfigError("controller.poles: pole placement needs a single input");
        if (!ctl["poles"].is_array() || ctl["poles"].size() != n)
            throw ConfigError("controller.poles: need exactly n poles");
        for (const auto& p : ctl["poles"])
            cfg.poles.push_back(parse_number(p, "controller.poles"));
    }
    if (ctl.contains("lambda")) cfg.lambda = parse_number(ctl["lambda"], "controller.lambda");
    if (ctl.contains("gamma")) cfg.gamma = parse_number(ctl["gamma"], "controller.gamma");
    if (ctl.contains("beta")) cfg.beta = parse_number(ctl["beta"], "controller.beta");
    if (ctl.contains("epsilon_tighten"))
        cfg.epsilon_tighten = parse_number(ctl["epsilon_tighten"], "controller.epsilon_tighten");
    if (ctl.contains("max_horizon")) {
        const double h = parse_number(ctl["max_horizon"], "controller.max_horizon");
        if (h < 1) throw ConfigError("controller.max_horizon: must be >= 1");
        cfg.max_horizon = static_cast<std::size_t>(h);
    }
    if (ctl.contains("r0")) {
        cfg.r0 = parse_vector(ctl["r0"], "controller.r0");
        if (cfg.r0.size() != m) throw ConfigError("controller.r0: must have m entries");
    }

    // --- cost ---
    const json& cost = doc["cost"];
    check_keys(cost, {"schedule", "frozen"}, "cost");
    if (cost.contains("schedule") == cost.contains("frozen"))
        throw ConfigError("cost: exactly one of schedule or frozen is required");
    std::optional<std::uint64_t> schedule_seed;
    if (cost.contains("frozen")) {
        cfg.cost.frozen = true;
        const json& fr = cost["frozen"];
        check_keys(fr, {"x_target", "q"}, "cost.frozen");
        if (!fr.contains("x_target") || !fr.contains("q"))
            throw ConfigError("cost.frozen: x_target and q are required");
        cfg.cost.frozen_cost.x_target = parse_vector(fr["x_target"], "cost.frozen.x_target");
        if (cfg.cost.frozen_cost.x_target.size() != n)
            throw ConfigError("cost.frozen.x_target: must have n entries");
        cfg.cost.frozen_cost.q = parse_number(fr["q"], "cost.frozen.q");
        if (cfg.cost.frozen_cost.q < 0.0) throw ConfigError("cost.frozen.q: must be >= 0");
    } else {
        const json& sch = cost["schedule"];
        check_keys(sch,
                   {"seed", "switch_probability", "q_range", "z_range", "sine_amplitude",
                    "sine_period"},
                   "cost.schedule");
        ScheduleParams& p = cfg.cost.schedule;
        if (sch.contains("seed")) {
            if (!sch["seed"].is_number_integer())
                throw ConfigError("cost.schedule.seed: expected an integer");
            schedule_seed = sch["seed"].get<std::uint64_t>();
        }
        if (sch.contains("switch_probability")) {
            p.switch_probability =
                parse_number(sch["switch_probability"], "cost.schedule.switch_probability");
            if (p.switch_probability < 0.0 || p.switch_probability > 1.0)
                throw ConfigError("cost.schedule.switch_probability: must be in [0, 1]");
        }
        const auto parse_range = [&](const char* key, double& lo, double& hi) {
            if (!sch.contains(key)) return;
            const json& r = sch[key];
            if (!r.is_array() || r.size() != 2)
                throw ConfigError(std::string("cost.schedule.") + key + ": expected [lo, hi]");
            lo = parse_number(r[0], key);
            hi = parse_number(r[1], key);
            if (lo > hi)
                throw ConfigError(std::string("cost.schedule.") + key + ": lo > hi");
        };
        parse_range("q_range", p.q_lo, p.q_hi);
        parse_range("z_range", p.z_lo, p.z_hi);
        if (p.q_lo < 0.0) throw ConfigError("cost.schedule.q_range: weights must be >= 0");
        if (sch.contains("sine_amplitude"))
            p.sine_amplitude = parse_number(sch["sine_amplitude"], "cost.schedule.sine_amplitude");
        if (sch.contains("sine_period")) {
            p.sine_period = parse_number(sch["sine_period"], "cost.schedule.sine_period");
            if (p.sine_period <= 0.0)
                throw ConfigError("cost.schedule.sine_period: must be positive");
        }
    }

    // --- run ---
    const json& run = doc["run"];
    check_keys(run,
               {"T", "seed", "x0", "trace_path", "summary_path", "include_mas_in_summary"},
               "run");
    if (!run.contains("T")) throw ConfigError("run.T: required");
    const double t_val = parse_number(run["T"], "run.T");
    if (t_val < 1.0) throw ConfigError("run.T: must be >= 1");
    cfg.T = static_cast<std::uint64_t>(t_val);
    std::optional<std::uint64_t> run_seed;
    if (run.contains("seed")) {
        if (!run["seed"].is_number_integer()) throw ConfigError("run.seed: expected an integer");
        run_seed = run["seed"].get<std::uint64_t>();
    }
    if (run.contains("x0")) {
        cfg.x0 = parse_vector(run["x0"], "run.x0");
        if (cfg.x0.size() != n) throw ConfigError("run.x0: must have n entries");
    }
    if (run.contains("trace_path")) cfg.trace_path = run["trace_path"].get<std::string>();
    if (run.contains("summary_path")) cfg.summary_path = run["summary_path"].get<std::string>();
    if (run.contains("include_mas_in_summary")) {
        if (!run["include_mas_in_summary"].is_boolean())
            throw ConfigError("run.include_mas_in_summary: expected a boolean");
        cfg.include_mas_in_summary = run["include_mas_in_summary"].get<bool>();
    }

    if (!cfg.cost.frozen) {
        if (schedule_seed && run_seed && *schedule_seed != *run_seed)
            throw ConfigError("config: cost.schedule.seed and run.seed disagree");
        if (schedule_seed)
            cfg.cost.schedule.seed = *schedule_seed;
        else if (run_seed)
            cfg.cost.schedule.seed = *run_seed;
        else
            throw ConfigError("config: a schedule needs a seed (cost.schedule.seed or run.seed)");
    }

    if (doc.contains("meta")) cfg.meta = doc["meta"];
    return cfg;
}

inline json scenario_to_json(const ScenarioConfig& cfg) {
    using detail::matrix_to_json;
    using detail::vector_to_json;
    json doc;
    doc["system"]["A"] = matrix_to_json(cfg.A);
    doc["system"]["B"] = matrix_to_json(cfg.B);
    if (cfg.box_shorthand) {
        doc["system"]["state_bound"] = cfg.state_bound;
        doc["system"]["input_bound"] = cfg.input_bound;
    } else {
        doc["system"]["C0"] = matrix_to_json(cfg.C0);
        doc["system"]["D0"] = matrix_to_json(cfg.D0);
        doc["system"]["Y"]["H"] = matrix_to_json(cfg.Y_H);
        doc["system"]["Y"]["h"] = vector_to_json(cfg.Y_h);
    }
    if (cfg.has_K)
        doc["controller"]["K"] = matrix_to_json(cfg.K);
    else
        doc["controller"]["poles"] = cfg.poles;
    doc["controller"]["lambda"] = cfg.lambda;
    doc["controller"]["gamma"] = cfg.gamma;
    doc["controller"]["beta"] = cfg.beta;
    doc["controller"]["epsilon_tighten"] = cfg.epsilon_tighten;
    if (cfg.r0.size() > 0) doc["controller"]["r0"] = vector_to_json(cfg.r0);
    if (cfg.cost.frozen) {
        doc["cost"]["frozen"]["x_target"] = vector_to_json(cfg.cost.frozen_cost.x_target);
        doc["cost"]["frozen"]["q"] = cfg.cost.frozen_cost.q;
    } else {
        const ScheduleParams& p = cfg.cost.schedule;
        doc["cost"]["schedule"]["seed"] = p.seed;
        doc["cost"]["schedule"]["switch_probability"] = p.switch_probability;
        doc["cost"]["schedule"]["q_range"] = {p.q_lo, p.q_hi};
        doc["cost"]["schedule"]["z_range"] = {p.z_lo, p.z_hi};
        doc["cost"]["schedule"]["sine_amplitude"] = p.sine_amplitude;
        doc["cost"]["schedule"]["sine_period"] = p.sine_period;
    }
    doc["run"]["T"] = cfg.T;
    if (cfg.x0.size() > 0) doc["run"]["x0"] = vector_to_json(cfg.x0);
    if (!cfg.trace_path.empty()) doc["run"]["trace_path"] = cfg.trace_path;
    if (!cfg.summary_path.empty()) doc["run"]["summary_path"] = cfg.summary_path;
    if (cfg.include_mas_in_summary) doc["run"]["include_mas_in_summary"] = true;
    if (!cfg.meta.empty()) doc["meta"] = cfg.meta;
    return doc;
}

struct BuiltScenario {
    ControllerConfig cfg;
    Vector x0, r0;
    std::uint64_t T = 0;
    CostSpec cost;
    bool include_mas_in_summary = false;
};

// Assembles plant, feedback, MAS, and controller configuration from a parsed
// scenario. Numerical failures surface as the module errors they arise from.
inline BuiltScenario build_scenario(const ScenarioConfig& cfg) {
    const std::size_t n = cfg.A.rows();
    const std::size_t m = cfg.B.cols();

    Matrix c0(0, 0), d0(0, 0);
    std::optional<Polytope> y;
    if (cfg.box_shorthand) {
        // outputs (x, u) with |x_i| <= state_bound, |u_j| <= input_bound
        c0 = Matrix(n + m, n);
        for (std::size_t i = 0; i < n; ++i) c0(i, i) = 1.0;
        d0 = Matrix(n + m, m);
        for (std::size_t j = 0; j < m; ++j) d0(n + j, j) = 1.0;
        std::vector<double> bounds(n + m, cfg.state_bound);
        for (std::size_t j = 0; j < m; ++j) bounds[n + j] = cfg.input_bound;
        y = Polytope::box(bounds);
    } else {
        c0 = cfg.C0;
        d0 = cfg.D0;
        y = Polytope::from_hrep(cfg.Y_H, cfg.Y_h);
    }
    LtiSystem plant(cfg.A, cfg.B, std::move(c0), std::move(d0), std::move(*y));

    const Matrix k = cfg.has_K ? cfg.K : place_poles_ackermann(cfg.A, cfg.B, cfg.poles);
    PrestabilizedSystem psys = prestabilize(plant, k, cfg.beta);
    LambdaMas mas = compute_lambda_mas(psys, cfg.lambda, cfg.epsilon_tighten, cfg.max_horizon);

    const auto [q_lo, q_hi] = cfg.cost.q_range();
    BuiltScenario built{make_controller_config(std::move(psys), std::move(mas), cfg.gamma, q_lo,
                                               q_hi),
                        cfg.x0.size() > 0 ? cfg.x0 : Vector(n, 1),
                        cfg.r0.size() > 0 ? cfg.r0 : Vector(m, 1),
                        cfg.T,
                        cfg.cost,
                        cfg.include_mas_in_summary};
    return built;
}

struct ScenarioResult {
    SimulationTrace trace;
    RegretReport report;
    double runtime_seconds = 0.0;
};

inline ScenarioResult run_scenario(const BuiltScenario& built) {
    const auto start = std::chrono::steady_clock::now();
    ScenarioResult result;
    result.trace = run_closed_loop(built.cfg, built.x0, built.r0,
                                   built.cost.make_source(built.cfg.sys.state_dim()), built.T);
    const auto [q_lo, q_hi] = built.cost.q_range();
    const double kappa = convexity_bounds(built.cfg.sys, q_lo, q_hi).kappa(built.cfg.gamma);
    result.report = build_regret_report(result.trace, built.cfg.sys,
                                        built.cost.lipschitz(built.cfg.sys), kappa);
    result.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

inline json summary_to_json(const ScenarioResult& result, const BuiltScenario& built) {
    const RegretReport& r = result.report;
    json s;
    s["T"] = built.T;
    s["regret"] = r.regret;
    s["path_length"] = r.path_length;
    s["ratio"] = r.ratio;
    s["epsilon_hat"] = r.epsilon_hat;
    s["kappa"] = r.kappa;
    s["bound_constants"] = {{"k_x", r.constants.k_x},
                            {"k_v", r.constants.k_v},
                            {"k_x_tilde", r.constants.k_x_tilde},
                            {"eps_kappa", r.constants.eps_kappa},
                            {"K_0_theta", r.constants.K_0_theta},
                            {"K_0_eta", r.constants.K_0_eta},
                            {"K_eta", r.constants.K_eta},
                            {"K_0", r.constants.K_0}};
    s["bound_valid"] = r.bound_valid;
    s["bound_value"] = r.bound_value;
    s["bound_holds"] = r.bound_holds;
    s["determination_index"] = built.cfg.mas.determination_index;
    s["max_constraint_margin"] = max_constraint_margin(result.trace);
    s["min_alpha"] = min_alpha(result.trace);
    s["gamma_within_step_bound"] = built.cfg.gamma_within_bound();
    s["runtime_seconds"] = result.runtime_seconds;
    if (built.include_mas_in_summary) {
        s["mas"]["H"] = detail::matrix_to_json(built.cfg.mas.set.h_matrix());
        s["mas"]["h"] = detail::vector_to_json(built.cfg.mas.set.h_vector());
    }
    return s;
}

// --- example generator -----------------------------------------------------

// Growth-rate proxy ||A^k||^(1/k); > 1 flags an unstable A without needing
// an eigensolver.
inline double growth_rate_proxy(const Matrix& a, std::size_t k = 20) {
    Matrix p = Matrix::identity(a.rows());
    for (std::size_t i = 0; i < k; ++i) p = p * a;
    return std::pow(spectral_norm(p), 1.0 / static_cast<double>(k));
}

// Seeded recreation of the published experiment family: a 5-state plant with
// uniformly sampled (and certified unstable) A, B = e_5, poles 0.1..0.3, box
// constraints at 1, lambda = beta = 0.95, gamma = 0.1, and the standard cost
// schedule. Resamples A until the whole pipeline accepts the scenario: the
// plant must be controllable, the admissible set must determine, the origin
// start must be feasible, and gamma = 0.1 must respect the step bound
// 2/(alpha_v + l_v) of the drawn steady-state map so the regret bound's
// contraction premise holds.
inline ScenarioConfig generate_example(std::uint64_t seed, std::uint64_t horizon = 1000) {
    const std::size_t n = 5;
    SplitMix64 rng(seed);
    for (int attempt = 1; attempt <= 1000; ++attempt) {
        Matrix a(n, n);
        for (std::size_t k = 0; k < n * n; ++k) a[k] = rng.uniform(-1.0, 1.0);

        bool unstable = false;
        try {
            solve_discrete_lyapunov(a);
        } catch (const NotSchurStable&) {
            unstable = true;
        }
        if (!unstable) continue; // the experiment needs prestabilization to matter

        ScenarioConfig cfg;
        cfg.A = a;
        cfg.B = Matrix(n, 1);
        cfg.B[n - 1] = 1.0;
        cfg.box_shorthand = true;
        cfg.state_bound = 1.0;
        cfg.input_bound = 1.0;
        cfg.poles = {0.1, 0.15, 0.2, 0.25, 0.3};
        cfg.lambda = 0.95;
        cfg.gamma = 0.1;
        cfg.beta = 0.95;
        cfg.epsilon_tighten = 1e-6;
        cfg.cost.frozen = false;
        cfg.cost.schedule.seed = seed;
        cfg.T = horizon;
        try {
            // cheap gates first: pole placement, then the step-size bound,
            // which needs only the steady-state map
            const Matrix k = place_poles_ackermann(cfg.A, cfg.B, cfg.poles);
            Matrix c0(n + 1, n);
            for (std::size_t i = 0; i < n; ++i) c0(i, i) = 1.0;
            Matrix d0(n + 1, 1);
            d0[n] = 1.0;
            const PrestabilizedSystem psys = prestabilize(
                LtiSystem(cfg.A, cfg.B, std::move(c0), std::move(d0),
                          Polytope::box(std::vector<double>(n + 1, 1.0))),
                k, cfg.beta);
            const double step_bound =
                convexity_bounds(psys, cfg.cost.schedule.q_lo, cfg.cost.schedule.q_hi).step_bound;
            if (cfg.gamma > step_bound) continue;
            const LambdaMas mas =
                compute_lambda_mas(psys, cfg.lambda, cfg.epsilon_tighten, cfg.max_horizon);
            if (!mas_contains(mas, Vector(1, 1), Vector(n, 1)))
                continue; // x0 = 0, r0 = 0 must be admissible
        } catch (const Error&) {
            continue;
        }
        cfg.meta = {{"generator_seed", seed},
                    {"attempt", attempt},
                    {"growth_rate_proxy", growth_rate_proxy(a)}};
        return cfg;
    }
    throw Error("generate_example: no valid scenario within 1000 resamples");
}

// --- command entry points ---------------------------------------------------

namespace detail {

inline void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "': expected key.path=value");
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    json* node = &doc;
    std::size_t begin = 0;
    while (true) {
        const auto dot = path.find('.', begin);
        const std::string key = path.substr(begin, dot == std::string::npos ? dot : dot - begin);
        if (key.empty()) throw ConfigError("override '" + assignment + "': empty path segment");
        if (dot == std::string::npos) {
            json parsed;
            try {
                parsed = json::parse(value);
            } catch (const json::parse_error&) {
                parsed = value; // plain string
            }
            (*node)[key] = std::move(parsed);
            return;
        }
        node = &(*node)[key];
        begin = dot + 1;
    }
}

} // namespace detail

// Loads, overrides, validates, builds, runs, and writes artifacts.
// Exit codes: 0 success, 2 infeasible initialization, 3 config/schema error,
// 4 numerical failure.
inline int run_command(const std::string& config_path, const std::vector<std::string>& overrides,
                       const std::string& trace_override, const std::string& summary_override,
                       std::ostream& err) {
    try {
        std::ifstream in(config_path);
        if (!in) {
            err << "error: cannot read config '" << config_path << "'\n";
            return 3;
        }
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            err << "error: config parse: " << e.what() << "\n";
            return 3;
        }
        for (const auto& o : overrides) detail::apply_override(doc, o);
        const ScenarioConfig cfg = parse_scenario(doc);

        const BuiltScenario built = build_scenario(cfg);
        if (!built.cfg.gamma_within_bound())
            err << "warning: gamma = " << built.cfg.gamma << " exceeds the step bound "
                << built.cfg.step_bound << " for the configured cost family\n";
        const ScenarioResult result = run_scenario(built);

        const std::string trace_path = !trace_override.empty() ? trace_override : cfg.trace_path;
        const std::string summary_path =
            !summary_override.empty() ? summary_override : cfg.summary_path;
        if (!trace_path.empty()) {
            std::ofstream os(trace_path);
            if (!os) {
                err << "error: cannot write trace '" << trace_path << "'\n";
                return 3;
            }
            write_trace_csv(result.trace, os);
        }
        if (!summary_path.empty()) {
            std::ofstream os(summary_path);
            if (!os) {
                err << "error: cannot write summary '" << summary_path << "'\n";
                return 3;
            }
            os << summary_to_json(result, built).dump(2) << "\n";
        }
        return 0;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const InfeasibleInitialization& e) {
        err << "error: " << e.what() << "\n"
            << "the initial reference/state pair violates the feasible-initialization "
               "requirement (r0 in S_v with (r0, x0 - S_K r0) admissible)\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    }
}

inline int gen_example_command(std::uint64_t seed, const std::string& out_path, std::ostream& err,
                               std::uint64_t horizon = 1000) {
    try {
        const ScenarioConfig cfg = generate_example(seed, horizon);
        std::ofstream os(out_path);
        if (!os) {
            err << "error: cannot write '" << out_path << "'\n";
            return 3;
        }
        os << scenario_to_json(cfg).dump(2) << "\n";
        return 0;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    }
}

} // namespace ocorg
