#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "cwgan/errors.hpp"
#include "cwgan/games.hpp"
#include "cwgan/matrix.hpp"
#include "cwgan/rng.hpp"
#include "cwgan/solvers.hpp"

using namespace cwgan;

namespace {

template <typename Fn>
std::optional<ErrorKind> thrown_kind(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

GameInstance toy_instance(double beta) {
    const DataMatrix x{{-1.0}, {1.0}};
    const DataMatrix z{{-1.0}, {1.0}};
    const DataMatrix w_freeze{{1.0}};
    return make_game_instance(x, z, w_freeze, beta);
}

GameState zero_state(const GameInstance& g) {
    GameState s;
    s.w = DataMatrix(g.z.cols(), g.x.cols(), 0.0);
    s.r.assign(g.pairs.size(), std::vector<double>(g.x.cols(), 0.0));
    s.r_prime.assign(g.pairs.size(), std::vector<double>(g.x.cols(), 0.0));
    s.lambda.assign(g.pairs.size(), std::vector<double>(g.z.rows(), 0.0));
    s.lambda_prime.assign(g.pairs.size(), std::vector<double>(g.z.rows(), 0.0));
    return s;
}

}  // namespace

TEST_CASE("instance construction and pair pruning") {
    const GameInstance g = toy_instance(0.1);
    CHECK(g.h_x.complete);
    CHECK(g.h_g.complete);
    // Sign-interleaved scalars give one pattern per side of the origin.
    REQUIRE(g.h_x.patterns.size() == 2);
    REQUIRE(g.h_g.patterns.size() == 2);
    CHECK(g.pairs.size() == 4);

    CHECK(thrown_kind([&] {
              make_game_instance(g.x, g.z, DataMatrix(1, 1, 1.0), 0.0);
          }) == ErrorKind::InvalidInput);
    CHECK(thrown_kind([&] {
              make_game_instance(g.x, g.z, DataMatrix(3, 1, 1.0), 0.1);
          }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("objective reduces to the penalty at an all-zero dual state") {
    const GameInstance g = toy_instance(0.1);
    GameState s = zero_state(g);
    CHECK(game_objective(s, g) == 0.0);
    s.w(0, 0) = 2.0;
    CHECK(game_objective(s, g) == doctest::Approx(4.0));  // squared-norm penalty only
}

TEST_CASE("single-block objective is the shrunk linear form") {
    const DataMatrix x{{1.0}};
    const DataMatrix z{{1.0}};
    const GameInstance g = make_game_instance(x, z, DataMatrix(1, 1, 1.0), 0.4);
    // Find the pair whose data-side pattern activates the single row.
    std::optional<std::size_t> target;
    for (std::size_t p = 0; p < g.pairs.size(); ++p) {
        if (g.h_x.patterns[g.pairs[p].j1].pattern[0] == 1 &&
            g.h_g.patterns[g.pairs[p].j2].pattern[0] == 1) {
            target = p;
        }
    }
    REQUIRE(target.has_value());
    GameState s = zero_state(g);
    for (double r : {0.5, -0.7, 2.0}) {
        s.r[*target][0] = r;
        // W = 0 kills every W-coupled term: objective = r − β|r|.
        CHECK(game_objective(s, g) == doctest::Approx(r - 0.4 * std::abs(r)).epsilon(1e-12));
    }
}

TEST_CASE("objective is concave in the blocks and convex in the weights") {
    const GameInstance g = toy_instance(0.3);
    const CounterRng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        GameState s1 = zero_state(g);
        GameState s2 = zero_state(g);
        GameState mid = zero_state(g);
        const double wv = rng.gaussian(100 + trial);
        s1.w(0, 0) = wv;
        s2.w(0, 0) = wv;
        mid.w(0, 0) = wv;
        for (std::size_t p = 0; p < g.pairs.size(); ++p) {
            s1.r[p][0] = rng.gaussian(1000 + 8 * trial + p);
            s2.r[p][0] = rng.gaussian(2000 + 8 * trial + p);
            s1.r_prime[p][0] = rng.gaussian(3000 + 8 * trial + p);
            s2.r_prime[p][0] = rng.gaussian(4000 + 8 * trial + p);
            mid.r[p][0] = 0.5 * (s1.r[p][0] + s2.r[p][0]);
            mid.r_prime[p][0] = 0.5 * (s1.r_prime[p][0] + s2.r_prime[p][0]);
        }
        CHECK(game_objective(mid, g) >=
              0.5 * (game_objective(s1, g) + game_objective(s2, g)) - 1e-9);

        // Convexity in W at frozen blocks.
        GameState w1 = s1, w2 = s1, wm = s1;
        w1.w(0, 0) = rng.gaussian(5000 + trial);
        w2.w(0, 0) = rng.gaussian(6000 + trial);
        wm.w(0, 0) = 0.5 * (w1.w(0, 0) + w2.w(0, 0));
        CHECK(game_objective(wm, g) <=
              0.5 * (game_objective(w1, g) + game_objective(w2, g)) + 1e-9);
    }
}

TEST_CASE("large shrinkage collapses the game to the penalty minimum") {
    const GameInstance g = toy_instance(25.0);
    const GameState s = primal_dual_solve(g, uniform_multipliers(g, 0.0, 0.0), 2000, 0.5);
    CHECK(frobenius_norm(s.w) < 1e-8);
    for (std::size_t p = 0; p < g.pairs.size(); ++p) {
        CHECK(norm2(s.r[p]) == 0.0);
        CHECK(norm2(s.r_prime[p]) == 0.0);
    }
    CHECK(s.saddle_residual_value < 1e-6);
}

TEST_CASE("fixed-multiplier game matches the interleaving solver on the toy line") {
    const GameInstance g = toy_instance(0.1);
    const MultiplierAssignment lambdas = cross_pair_multipliers(g, 1.0);
    const GameState s = primal_dual_solve(g, lambdas, 400000, 0.5);
    const std::vector<double> w1d = solve_1d_relu_program({-1.0, 1.0}, 0.1);
    const DataMatrix gen = matmul(g.z, s.w);
    // Latent rows were laid out against the sorted data, so outputs align.
    CHECK(gen(0, 0) == doctest::Approx(w1d[0]).epsilon(2e-3));
    CHECK(gen(1, 0) == doctest::Approx(w1d[1]).epsilon(2e-3));

    // Refreezing the generated-side patterns at the solution and re-solving
    // moves the objective by less than the saddle tolerance.
    const GameInstance g2 = refreeze_instance(g, s.w);
    REQUIRE(g2.h_g.patterns.size() == g.h_g.patterns.size());
    const GameState s2 = primal_dual_solve(g2, cross_pair_multipliers(g2, 1.0), 400000, 0.5);
    CHECK(game_objective(s2, g2) == doctest::Approx(game_objective(s, g)).epsilon(1e-3));
}

TEST_CASE("residual trend improves with more iterations") {
    const GameInstance g = toy_instance(0.1);
    const MultiplierAssignment lambdas = cross_pair_multipliers(g, 1.0);
    const GameState coarse = primal_dual_solve(g, lambdas, 3000, 0.5);
    const GameState fine = primal_dual_solve(g, lambdas, 100000, 0.5);
    CHECK(fine.saddle_residual_value <= coarse.saddle_residual_value * 1.5 + 1e-9);
}

TEST_CASE("oversized steps are reported as divergence") {
    const GameInstance g = toy_instance(0.1);
    const MultiplierAssignment lambdas = cross_pair_multipliers(g, 1.0);
    CHECK(thrown_kind([&] { primal_dual_solve(g, lambdas, 50000, 120.0); }) ==
          ErrorKind::Diverged);
    CHECK(thrown_kind([&] { primal_dual_solve(g, lambdas, 0, 0.5); }) ==
          ErrorKind::InvalidInput);
    CHECK(thrown_kind([&] { primal_dual_solve(g, lambdas, 10, -0.5); }) ==
          ErrorKind::InvalidInput);
    MultiplierAssignment negative = lambdas;
    negative.level[0] = -1.0;
    CHECK(thrown_kind([&] { primal_dual_solve(g, negative, 10, 0.5); }) ==
          ErrorKind::InvalidInput);
}

TEST_CASE("saddle residual vanishes on a feasible all-zero state") {
    // β above the activation transport gap of the zero generator makes the
    // zero state an exact saddle.
    const GameInstance g = toy_instance(1.5);
    const GameState s = zero_state(g);
    CHECK(saddle_residual(s, g, 12) < 1e-9);
    CHECK(thrown_kind([&] { saddle_residual(s, g, 0); }) == ErrorKind::InvalidInput);
}

TEST_CASE("saddle residual grows quadratically under weight perturbation") {
    const GameInstance g = toy_instance(25.0);  // blocks stay silent
    for (double delta : {0.2, 0.05}) {
        GameState s = zero_state(g);
        s.w(0, 0) = delta;
        const double res = saddle_residual(s, g, 10);
        CHECK(res >= 0.25 * delta * delta);
        CHECK(res <= 2.1 * delta * delta);  // the penalty is exactly quadratic
    }
}

TEST_CASE("solver residual is self-consistent") {
    const GameInstance g = toy_instance(0.1);
    const GameState s = primal_dual_solve(g, cross_pair_multipliers(g, 1.0), 200000, 0.5);
    const double recomputed = saddle_residual(s, g, 24);
    CHECK(recomputed <= 2.0 * s.saddle_residual_value + 1e-9);
    CHECK(s.saddle_residual_value <= 2.0 * recomputed + 1e-9);
}
