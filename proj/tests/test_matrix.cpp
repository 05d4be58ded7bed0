#include <catch2/catch_amalgamated.hpp>

#include "ocorg/matrix.hpp"
#include "test_support.hpp"

using namespace ocorg;
using test_support::matrix_power;
using test_support::random_stable_matrix;

TEST_CASE("solve_linear identity and diagonal", "[matrix]") {
    const Matrix b{{1.0}, {-2.0}, {3.5}};
    const Matrix x = solve_linear(Matrix::identity(3), b);
    for (std::size_t i = 0; i < 3; ++i) CHECK(x[i] == Catch::Approx(b[i]));

    const Matrix a{{2.0, 0.0}, {0.0, 4.0}};
    const Matrix x2 = solve_linear(a, Matrix{{1.0}, {1.0}});
    CHECK(x2[0] == Catch::Approx(0.5));
    CHECK(x2[1] == Catch::Approx(0.25));
}

TEST_CASE("solve_linear scalar steady-state map", "[matrix]") {
    // (I - A_K)^{-1} B for the scalar reference system A_K = 0.5, B = 1
    const Matrix a{{1.0 - 0.5}};
    const Matrix x = solve_linear(a, Matrix{{1.0}});
    CHECK(x[0] == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("solve_linear rejects singular systems", "[matrix]") {
    const Matrix a{{1.0, 2.0}, {2.0, 4.0}};
    CHECK_THROWS_AS(solve_linear(a, Matrix{{1.0}, {1.0}}), SingularMatrix);
}

TEST_CASE("solve_linear residual bound on random systems", "[matrix]") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.next() % 7);
        Matrix a(n, n), b(n, 2);
        for (std::size_t k = 0; k < n * n; ++k) a[k] = rng.uniform(-2.0, 2.0);
        for (std::size_t k = 0; k < 2 * n; ++k) b[k] = rng.uniform(-3.0, 3.0);
        Matrix x(0, 0);
        try {
            x = solve_linear(a, b);
        } catch (const SingularMatrix&) {
            continue;
        }
        CHECK(inf_norm(a * x - b) <= 1e-9 * (1.0 + inf_norm(b)));
    }
}

TEST_CASE("discrete Lyapunov closed forms", "[matrix]") {
    const Matrix p0 = solve_discrete_lyapunov(Matrix{{0.0}});
    CHECK(p0[0] == Catch::Approx(1.0));

    const Matrix p = solve_discrete_lyapunov(Matrix{{0.5}});
    CHECK(p[0] == Catch::Approx(4.0 / 3.0));

    CHECK_THROWS_AS(solve_discrete_lyapunov(Matrix{{1.0}}), NotSchurStable);
    CHECK_THROWS_AS(solve_discrete_lyapunov(Matrix{{1.3}}), NotSchurStable);
}

TEST_CASE("discrete Lyapunov residual on random stable matrices", "[matrix]") {
    SplitMix64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.next() % 4);
        const Matrix a = random_stable_matrix(rng, n);
        const Matrix p = solve_discrete_lyapunov(a);
        const Matrix res = a.transpose() * p * a - p + Matrix::identity(n);
        CHECK(inf_norm(res) <= 1e-8);
    }
}

TEST_CASE("sym_eig_extremes on known spectra", "[matrix]") {
    auto [lo1, hi1] = sym_eig_extremes(Matrix::identity(3));
    CHECK(lo1 == Catch::Approx(1.0));
    CHECK(hi1 == Catch::Approx(1.0));

    auto [lo2, hi2] = sym_eig_extremes(Matrix{{2.0, 0.0}, {0.0, 5.0}});
    CHECK(lo2 == Catch::Approx(2.0).epsilon(1e-8));
    CHECK(hi2 == Catch::Approx(5.0).epsilon(1e-8));

    auto [lo3, hi3] = sym_eig_extremes(Matrix{{4.0, 1.0}, {1.0, 4.0}});
    CHECK(lo3 == Catch::Approx(3.0).epsilon(1e-8));
    CHECK(hi3 == Catch::Approx(5.0).epsilon(1e-8));

    // start vector aligned with the non-dominant eigenvector
    auto [lo4, hi4] = sym_eig_extremes(Matrix{{4.0, -1.0}, {-1.0, 4.0}});
    CHECK(lo4 == Catch::Approx(3.0).epsilon(1e-8));
    CHECK(hi4 == Catch::Approx(5.0).epsilon(1e-8));

    CHECK_THROWS_AS(sym_eig_extremes(Matrix{{1.0, 2.0}, {0.0, 1.0}}), NotSymmetric);
}

TEST_CASE("decay envelope closed forms", "[matrix]") {
    const auto env = schur_decay_envelope(Matrix{{0.5}});
    CHECK(env.c == Catch::Approx(1.0));
    CHECK(env.sigma == Catch::Approx(0.5).epsilon(1e-8));

    const auto env0 = schur_decay_envelope(Matrix{{0.0}});
    CHECK(env0.c == Catch::Approx(1.0));
    CHECK(env0.sigma >= 1e-9); // clamped away from zero
    CHECK(env0.sigma < 1.0);
}

TEST_CASE("decay envelope bounds matrix powers", "[matrix]") {
    const Matrix a{{0.1, 0.0}, {0.0, 0.3}};
    const auto env = schur_decay_envelope(a);
    for (std::size_t t = 0; t <= 50; ++t) {
        const double norm_t = spectral_norm(matrix_power(a, t));
        CHECK(norm_t <= env.c * std::pow(env.sigma, static_cast<double>(t)) * (1.0 + 1e-9) + 1e-12);
    }
}

TEST_CASE("decay envelope property on random stable matrices", "[matrix]") {
    SplitMix64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.next() % 4);
        const Matrix a = random_stable_matrix(rng, n);
        const auto env = schur_decay_envelope(a);
        REQUIRE(env.c >= 1.0);
        REQUIRE(env.sigma > 0.0);
        REQUIRE(env.sigma < 1.0);
        Matrix pw = Matrix::identity(n);
        for (std::size_t t = 0; t <= 50; ++t) {
            const double norm_t = spectral_norm(pw);
            REQUIRE(norm_t <= env.c * std::pow(env.sigma, static_cast<double>(t)) * (1.0 + 1e-9) + 1e-12);
            pw = pw * a;
        }
    }
}

TEST_CASE("matrix rejects non-finite entries", "[matrix]") {
    std::vector<double> bad = {1.0, std::nan(""), 0.0, 1.0};
    CHECK_THROWS_AS(Matrix(2, 2, bad), Error);
}

TEST_CASE("spectral norm matches hand values", "[matrix]") {
    CHECK(spectral_norm(Matrix{{3.0, 0.0}, {0.0, -4.0}}) == Catch::Approx(4.0).epsilon(1e-8));
    // rank-one [1; 2]: norm = sqrt(5)
    CHECK(spectral_norm(Matrix{{1.0}, {2.0}}) == Catch::Approx(std::sqrt(5.0)).epsilon(1e-8));
}
