#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "cwgan/arrangements.hpp"
#include "cwgan/matrix.hpp"
#include "cwgan/solvers.hpp"

namespace cwgan {

// One retained product of an X-side activation pattern (index into h_x) with a
// generated-side pattern (index into h_g).
struct GamePair {
    std::size_t j1 = 0;
    std::size_t j2 = 0;
};

// A convex-concave game between linear generator weights W and per-pair dual
// directions, with the generated-side cone constraints moved into the
// objective under fixed nonnegative multipliers. The generated-side pattern
// set is frozen at construction and must be refrozen when W moves far enough
// to change activation geometry.
struct GameInstance {
    DataMatrix x;  // n×d data
    DataMatrix z;  // n_z×d_r latents
    double beta_d = 1.0;
    Regularizer reg = Regularizer::squared_frobenius();
    ArrangementSet h_x;  // patterns of the data matrix
    ArrangementSet h_g;  // patterns of the frozen generated matrix
    std::vector<GamePair> pairs;
};

// Fixed multiplier levels, one per retained pair; `level` scales the
// multiplier vector attached to the r-block, `level_prime` the r'-block. Each
// level is broadcast uniformly across that pair's data rows.
struct MultiplierAssignment {
    std::vector<double> level;
    std::vector<double> level_prime;
};

struct GameState {
    DataMatrix w;  // d_r×d generator weights
    std::vector<std::vector<double>> r;        // per pair, length d
    std::vector<std::vector<double>> r_prime;  // per pair, length d
    std::vector<std::vector<double>> lambda;        // per pair, length n, >= 0
    std::vector<std::vector<double>> lambda_prime;  // per pair, length n, >= 0
    double saddle_residual_value = 0.0;  // diagnostic filled by the solver
};

// Builds the instance: enumerates activation patterns of X and of Z·w_freeze,
// forms the pattern-pair product, and prunes pairs whose data-side masked
// column sum vanishes and whose generated-side pattern has no active rows
// (those blocks contribute exactly zero at r = 0). `budget`/`seed` feed the
// sampling fallback of the pattern enumeration in higher dimensions.
// Errors: InvalidInput (beta_d <= 0, empty inputs), DimensionMismatch.
GameInstance make_game_instance(const DataMatrix& x, const DataMatrix& z,
                                const DataMatrix& w_freeze, double beta_d,
                                const Regularizer& reg = Regularizer::squared_frobenius(),
                                std::size_t budget = 0, std::uint64_t seed = 0);

// Same instance with the generated-side patterns recomputed at Z·w (the
// "refreeze" step between outer rounds).
GameInstance refreeze_instance(const GameInstance& g, const DataMatrix& w);

// Uniform levels on every pair.
MultiplierAssignment uniform_multipliers(const GameInstance& g, double level,
                                         double level_prime);

// `level` on pairs whose two patterns differ, zero on aligned pairs — the
// assignment that bounds the relaxation on sign-interleaved instances.
MultiplierAssignment cross_pair_multipliers(const GameInstance& g, double level);

// Value of the relaxed objective at a state: reg(W) − β_d Σ(‖r‖+‖r'‖)
// + Σ (masked column-sum gap)·(r − r') + Σ λ·(signed generated rows)·r
// + Σ λ'·(signed generated rows)·r'.
// Errors: DimensionMismatch.
double game_objective(const GameState& s, const GameInstance& g);

// First-order primal-dual scheme: extrapolated gradient descent on W against
// prox-ascent on every (r, r') block (ℓ2-shrinkage from the −β_d‖·‖ terms
// followed by projection onto the data-side cone). `step` scales the paired
// step sizes relative to the stability bound 1/‖coupling‖ estimated by power
// iteration. Returns the final state with a saddle-residual diagnostic.
// Errors: InvalidInput (iters < 1 or step <= 0); Diverged when an iterate norm
// exceeds 1e6 (message reports the step size).
GameState primal_dual_solve(const GameInstance& g, const MultiplierAssignment& lambdas,
                            std::size_t iters, double step);

// Approximate saddle certificate: best objective decrease available to W along
// a probed line search plus the largest objective increase any single (r, r')
// block can gain from its capped closed-form best response. Zero at exact
// saddle points. Errors: InvalidInput (probe_count < 1).
double saddle_residual(const GameState& s, const GameInstance& g, std::size_t probe_count);

}  // namespace cwgan
