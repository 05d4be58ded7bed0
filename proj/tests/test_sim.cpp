#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "ocorg/sim.hpp"
#include "test_support.hpp"

using namespace ocorg;

namespace {

ControllerConfig scalar_config(double gamma = 0.1) {
    auto psys = prestabilize(LtiSystem(Matrix{{0.5}}, Matrix{{1.0}}, Matrix{{1.0}, {0.0}},
                                       Matrix{{0.0}, {1.0}}, Polytope::box({1.0, 1.0})),
                             Matrix{{0.0}}, 0.95);
    auto mas = compute_lambda_mas(psys, 0.9);
    return make_controller_config(std::move(psys), std::move(mas), gamma, 0.0, 2.0);
}

SimulationTrace two_step_trace(double stage0, double bench0, double stage1, double bench1) {
    SimulationTrace trace;
    trace.state_dim = trace.input_dim = trace.output_dim = 1;
    for (int t = 0; t < 2; ++t) {
        StepRecord rec;
        rec.t = static_cast<std::uint64_t>(t);
        rec.x = rec.u = rec.y = rec.v = rec.r = rec.eta = rec.theta = vec({0.0});
        rec.stage_cost = t == 0 ? stage0 : stage1;
        rec.benchmark_cost = t == 0 ? bench0 : bench1;
        trace.steps.push_back(rec);
    }
    return trace;
}

} // namespace

TEST_CASE("already optimal loop accrues no regret", "[sim]") {
    const auto cfg = scalar_config();
    const auto trace = run_closed_loop(cfg, vec({0.0}), vec({0.0}),
                                       frozen_cost_source({vec({0.0}), 1.0}), 50);
    REQUIRE(trace.steps.size() == 51);
    for (const auto& s : trace.steps) {
        CHECK(max_abs(s.x) == 0.0);
        CHECK(max_abs(s.u) == 0.0);
        CHECK(s.alpha == 1.0);
    }
    CHECK(dynamic_regret(trace) == Catch::Approx(0.0).margin(1e-15));
    CHECK(path_length(trace) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("scalar frozen-cost run follows the recursion oracle", "[sim]") {
    const auto cfg = scalar_config(0.1);
    const QuadraticTrackingCost cost{vec({0.5}), 1.0};
    const auto trace = run_closed_loop(cfg, vec({0.0}), vec({0.0}), frozen_cost_source(cost), 20);
    REQUIRE(trace.steps.size() == 21);

    // hand recursion: r+ = 0.5 r + 0.1, v = r (no clipping), x+ = 0.5 x + v
    double r = 0.0, x = 0.0, regret_oracle = 0.0;
    const double eta = 0.2, theta = 0.4;
    const double bench = 0.5 * (theta - 0.5) * (theta - 0.5) + 0.5 * eta * eta;
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        if (t > 0) {
            r = 0.5 * r + 0.1;
        }
        const auto& rec = trace.steps[t];
        REQUIRE(std::abs(rec.r[0] - r) <= 1e-12);
        REQUIRE(std::abs(rec.v[0] - r) <= 1e-12);
        REQUIRE(std::abs(rec.x[0] - x) <= 1e-12);
        CHECK(rec.eta[0] == Catch::Approx(eta).margin(1e-9));
        CHECK(rec.theta[0] == Catch::Approx(theta).margin(1e-9));
        const double stage = 0.5 * (x - 0.5) * (x - 0.5) + 0.5 * r * r;
        regret_oracle += stage - bench;
        x = 0.5 * x + r;
    }
    CHECK(dynamic_regret(trace) == Catch::Approx(regret_oracle).margin(1e-9));
    // the loop converges toward the optimal steady state
    CHECK(std::abs(trace.steps.back().x[0] - theta) < 2e-2);
}

TEST_CASE("regret and path length arithmetic", "[sim]") {
    const auto trace = two_step_trace(1.5, 0.5, 0.0, 0.0);
    CHECK(dynamic_regret(trace) == Catch::Approx(1.0));

    SimulationTrace alt;
    alt.state_dim = alt.input_dim = alt.output_dim = 1;
    for (int t = 0; t < 4; ++t) {
        StepRecord rec;
        rec.t = static_cast<std::uint64_t>(t);
        rec.x = rec.u = rec.y = rec.v = rec.r = rec.theta = vec({0.0});
        rec.eta = vec({t % 2 == 0 ? 0.1 : -0.1});
        alt.steps.push_back(rec);
    }
    CHECK(path_length(alt) == Catch::Approx(0.6));
}

TEST_CASE("regret bound constants by direct formula evaluation", "[sim]") {
    const auto cfg = scalar_config();
    const double l_L = 2.0;
    // K = 0, S_K = 2, c = 1, sigma = 0.5: k_x = l_L, k_v = l_L sqrt(5)
    const auto cs = regret_bound_constants(cfg.sys, l_L, 0.5, 1.0, vec({0.3}), vec({0.4}),
                                           vec({0.1}), vec({0.2}));
    CHECK(cs.k_x == Catch::Approx(2.0).epsilon(1e-8));
    CHECK(cs.k_v == Catch::Approx(2.0 * std::sqrt(5.0)).epsilon(1e-8));
    CHECK(cs.k_x_tilde == Catch::Approx(4.0).epsilon(1e-8));
    CHECK(cs.eps_kappa == Catch::Approx(0.5));
    CHECK(cs.K_0_theta == Catch::Approx(2.0 * cs.k_x).epsilon(1e-8));
    CHECK(cs.K_0_eta ==
          Catch::Approx((2.0 * cs.k_x_tilde * 1.5 + cs.k_v * 0.5) / (0.5 * 0.5)).epsilon(1e-8));
    CHECK(cs.K_eta ==
          Catch::Approx((cs.k_x_tilde * 2.5 + cs.k_v * 0.5) / (0.5 * 0.5)).epsilon(1e-8));
    CHECK(cs.K_0 == Catch::Approx(cs.K_0_theta * 0.1 + cs.K_0_eta * 0.1).epsilon(1e-8));

    // kappa -> 0, epsilon -> 1 limit: K_eta = (3 k_x_tilde + k_v (1-sigma)) / (1-sigma)
    const auto limit = regret_bound_constants(cfg.sys, l_L, 0.0, 1.0, vec({0.0}), vec({0.0}),
                                              vec({0.0}), vec({0.0}));
    CHECK(limit.K_eta ==
          Catch::Approx((3.0 * limit.k_x_tilde + limit.k_v * 0.5) / 0.5).epsilon(1e-8));
    CHECK(limit.K_0 == Catch::Approx(0.0).margin(1e-12)); // zero initial offsets

    CHECK_THROWS_AS(regret_bound_constants(cfg.sys, l_L, 0.5, 0.0, vec({0.0}), vec({0.0}),
                                           vec({0.0}), vec({0.0})),
                    InvalidEpsilon);
}

TEST_CASE("schedule-driven run respects the invariants", "[sim]") {
    const auto cfg = scalar_config();
    ScheduleParams params;
    params.seed = 7;
    params.switch_probability = 0.05;
    const auto trace = run_closed_loop(cfg, vec({0.0}), vec({0.0}),
                                       schedule_cost_source(CostSchedule(params, 1)), 300);
    REQUIRE(trace.steps.size() == 301);
    CHECK(max_constraint_margin(trace) <= 1e-9);
    for (const auto& s : trace.steps) {
        CHECK(s.alpha > 0.0);
        CHECK(s.alpha <= 1.0);
        CHECK(contains(cfg.sys.S_v_bar, s.r, 1e-9));
        CHECK(mas_contains(cfg.mas, s.v, s.x - cfg.sys.S_K * s.v));
    }
    const double l_L = lipschitz_estimate(cfg.sys, params);
    const auto report = build_regret_report(trace, cfg.sys, l_L,
                                            convexity_bounds(cfg.sys, 0.0, 2.0).kappa(cfg.gamma));
    CHECK(report.epsilon_hat > 0.0);
    CHECK(std::isfinite(report.regret));
    CHECK(report.path_length > 0.0);
}

TEST_CASE("frozen-cost regret converges in the horizon", "[sim]") {
    const auto cfg = scalar_config();
    const QuadraticTrackingCost cost{vec({0.4}), 0.5};
    const auto t500 = run_closed_loop(cfg, vec({0.0}), vec({0.0}), frozen_cost_source(cost), 500);
    const auto t1000 = run_closed_loop(cfg, vec({0.0}), vec({0.0}), frozen_cost_source(cost), 1000);
    CHECK(std::abs(dynamic_regret(t1000) - dynamic_regret(t500)) <= 1e-6);
}

TEST_CASE("csv trace format and determinism", "[sim]") {
    const auto cfg = scalar_config();
    ScheduleParams params;
    params.seed = 99;
    const auto run_once = [&]() {
        const auto trace = run_closed_loop(cfg, vec({0.0}), vec({0.0}),
                                           schedule_cost_source(CostSchedule(params, 1)), 25);
        std::ostringstream os;
        write_trace_csv(trace, os);
        return os.str();
    };
    const std::string a = run_once();
    const std::string b = run_once();
    CHECK(a == b); // byte-identical

    std::istringstream is(a);
    std::string header;
    std::getline(is, header);
    CHECK(header ==
          "t,x_1,u_1,v_1,r_1,alpha,eta_1,stage_cost,benchmark_cost,constraint_margin");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 26);

    // 17 significant digits round-trip exactly
    const double value = 0.1 + 0.2;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    CHECK(std::stod(buf) == value);
}
