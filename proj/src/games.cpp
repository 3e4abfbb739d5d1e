#include "cwgan/games.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cwgan/errors.hpp"
#include "cwgan/numerics.hpp"

namespace cwgan {

namespace {

std::vector<double> flatten(const DataMatrix& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
}

// Masked column sums X^T h for a 0/1 pattern h over rows of m.
std::vector<double> masked_column_sums(const DataMatrix& m, const std::vector<std::uint8_t>& h) {
    std::vector<double> out(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (!h[i]) continue;
        for (std::size_t j = 0; j < m.cols(); ++j) out[j] += m(i, j);
    }
    return out;
}

// Z^T (sign ⊙ v) where sign_i = ±1 comes from the pattern bits.
std::vector<double> signed_latent_weight(const DataMatrix& z, const std::vector<std::uint8_t>& h,
                                         const std::vector<double>& v) {
    std::vector<double> out(z.cols(), 0.0);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const double s = (h[i] ? 1.0 : -1.0) * v[i];
        if (s == 0.0) continue;
        for (std::size_t j = 0; j < z.cols(); ++j) out[j] += s * z(i, j);
    }
    return out;
}

std::vector<double> mat_t_vec(const DataMatrix& w, const std::vector<double>& v) {
    // w^T v for v of length rows(w).
    std::vector<double> out(w.cols(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) out[j] += w(i, j) * v[i];
    }
    return out;
}

void shrink_block(std::vector<double>& v, double amount) {
    const double n = norm2(v);
    if (n <= amount) {
        std::fill(v.begin(), v.end(), 0.0);
        return;
    }
    const double scale = 1.0 - amount / n;
    for (double& t : v) t *= scale;
}

struct PairGeometry {
    std::vector<double> a;        // data-side masked column sums
    std::vector<double> zh;       // Z^T h_g
    std::vector<double> q;        // Z^T (sign ⊙ λ)
    std::vector<double> q_prime;  // Z^T (sign ⊙ λ')
};

std::vector<PairGeometry> pair_geometry(const GameInstance& g, const GameState& s) {
    std::vector<PairGeometry> out(g.pairs.size());
    for (std::size_t p = 0; p < g.pairs.size(); ++p) {
        const auto& hx = g.h_x.patterns[g.pairs[p].j1].pattern;
        const auto& hg = g.h_g.patterns[g.pairs[p].j2].pattern;
        out[p].a = masked_column_sums(g.x, hx);
        out[p].zh = masked_column_sums(g.z, hg);
        out[p].q = signed_latent_weight(g.z, hg, s.lambda[p]);
        out[p].q_prime = signed_latent_weight(g.z, hg, s.lambda_prime[p]);
    }
    return out;
}

std::vector<std::vector<double>> cone_normals(const DataMatrix& x,
                                              const std::vector<std::uint8_t>& hx) {
    std::vector<std::vector<double>> normals(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        normals[i].resize(x.cols());
        const double sgn = hx[i] ? 1.0 : -1.0;
        for (std::size_t j = 0; j < x.cols(); ++j) normals[i][j] = sgn * x(i, j);
    }
    return normals;
}

void check_state_shapes(const GameState& s, const GameInstance& g) {
    if (s.w.rows() != g.z.cols() || s.w.cols() != g.x.cols()) {
        fail(ErrorKind::DimensionMismatch, "generator weight shape");
    }
    const std::size_t np = g.pairs.size();
    if (s.r.size() != np || s.r_prime.size() != np || s.lambda.size() != np ||
        s.lambda_prime.size() != np) {
        fail(ErrorKind::DimensionMismatch, "per-pair block count");
    }
    for (std::size_t p = 0; p < np; ++p) {
        if (s.r[p].size() != g.x.cols() || s.r_prime[p].size() != g.x.cols()) {
            fail(ErrorKind::DimensionMismatch, "dual direction length");
        }
        if (s.lambda[p].size() != g.z.rows() || s.lambda_prime[p].size() != g.z.rows()) {
            fail(ErrorKind::DimensionMismatch, "multiplier length");
        }
    }
}

}  // namespace

GameInstance make_game_instance(const DataMatrix& x, const DataMatrix& z,
                                const DataMatrix& w_freeze, double beta_d,
                                const Regularizer& reg, std::size_t budget,
                                std::uint64_t seed) {
    if (!(beta_d > 0.0) || !std::isfinite(beta_d)) {
        fail(ErrorKind::InvalidInput, "beta_d must be a positive real");
    }
    if (x.empty() || z.empty()) fail(ErrorKind::InvalidInput, "empty game data");
    require_finite(x, "game data");
    require_finite(z, "game latents");
    if (w_freeze.rows() != z.cols() || w_freeze.cols() != x.cols()) {
        fail(ErrorKind::DimensionMismatch, "freeze-point weight shape");
    }
    GameInstance g;
    g.x = x;
    g.z = z;
    g.beta_d = beta_d;
    g.reg = reg;
    g.h_x = enumerate_arrangements(x, false, budget, seed);
    g.h_g = enumerate_arrangements(matmul(z, w_freeze), false, budget, seed + 1);
    for (std::size_t j1 = 0; j1 < g.h_x.patterns.size(); ++j1) {
        const std::vector<double> a = masked_column_sums(x, g.h_x.patterns[j1].pattern);
        const bool a_nonzero = norm2(a) > 0.0;
        for (std::size_t j2 = 0; j2 < g.h_g.patterns.size(); ++j2) {
            const auto& hg = g.h_g.patterns[j2].pattern;
            const bool active = std::any_of(hg.begin(), hg.end(),
                                            [](std::uint8_t b) { return b != 0; });
            if (a_nonzero || active) g.pairs.push_back({j1, j2});
        }
    }
    return g;
}

GameInstance refreeze_instance(const GameInstance& g, const DataMatrix& w) {
    return make_game_instance(g.x, g.z, w, g.beta_d, g.reg);
}

MultiplierAssignment uniform_multipliers(const GameInstance& g, double level,
                                         double level_prime) {
    MultiplierAssignment m;
    m.level.assign(g.pairs.size(), level);
    m.level_prime.assign(g.pairs.size(), level_prime);
    return m;
}

MultiplierAssignment cross_pair_multipliers(const GameInstance& g, double level) {
    MultiplierAssignment m;
    m.level.assign(g.pairs.size(), 0.0);
    m.level_prime.assign(g.pairs.size(), 0.0);
    for (std::size_t p = 0; p < g.pairs.size(); ++p) {
        const auto& hx = g.h_x.patterns[g.pairs[p].j1].pattern;
        const auto& hg = g.h_g.patterns[g.pairs[p].j2].pattern;
        const bool aligned = hx.size() == hg.size() && std::equal(hx.begin(), hx.end(), hg.begin());
        if (!aligned) {
            m.level[p] = level;
            m.level_prime[p] = level;
        }
    }
    return m;
}

double game_objective(const GameState& s, const GameInstance& g) {
    check_state_shapes(s, g);
    const std::vector<PairGeometry> geo = pair_geometry(g, s);
    double obj = g.reg.value(flatten(s.w));
    for (std::size_t p = 0; p < g.pairs.size(); ++p) {
        obj -= g.beta_d * (norm2(s.r[p]) + norm2(s.r_prime[p]));
        const std::vector<double> b = mat_t_vec(s.w, geo[p].zh);
        for (std::size_t j = 0; j < g.x.cols(); ++j) {
            obj += (geo[p].a[j] - b[j]) * (s.r[p][j] - s.r_prime[p][j]);
        }
        const std::vector<double> wq = mat_t_vec(s.w, geo[p].q);
        const std::vector<double> wq_prime = mat_t_vec(s.w, geo[p].q_prime);
        obj += dot(wq, s.r[p]) + dot(wq_prime, s.r_prime[p]);
    }
    return obj;
}

namespace {

// Gradient of the coupled part with respect to W at fixed blocks, plus the
// penalty subgradient.
DataMatrix w_gradient(const GameState& s, const GameInstance& g,
                      const std::vector<PairGeometry>& geo) {
    const std::size_t dr = g.z.cols();
    const std::size_t d = g.x.cols();
    const std::vector<double> rg = g.reg.subgradient(flatten(s.w));
    DataMatrix grad(dr, d);
    for (std::size_t i = 0; i < dr; ++i) {
        for (std::size_t j = 0; j < d; ++j) grad(i, j) = rg[i * d + j];
    }
    for (std::size_t p = 0; p < g.pairs.size(); ++p) {
        for (std::size_t i = 0; i < dr; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                grad(i, j) += -geo[p].zh[i] * (s.r[p][j] - s.r_prime[p][j]) +
                              geo[p].q[i] * s.r[p][j] + geo[p].q_prime[i] * s.r_prime[p][j];
            }
        }
    }
    return grad;
}

}  // namespace

GameState primal_dual_solve(const GameInstance& g, const MultiplierAssignment& lambdas,
                            std::size_t iters, double step) {
    if (iters < 1) fail(ErrorKind::InvalidInput, "need at least one iteration");
    if (!(step > 0.0) || !std::isfinite(step)) {
        fail(ErrorKind::InvalidInput, "step scale must be positive");
    }
    if (lambdas.level.size() != g.pairs.size() ||
        lambdas.level_prime.size() != g.pairs.size()) {
        fail(ErrorKind::DimensionMismatch, "one multiplier level per pair expected");
    }
    for (double level : lambdas.level) {
        if (level < 0.0 || !std::isfinite(level)) {
            fail(ErrorKind::InvalidInput, "multiplier levels must be nonnegative");
        }
    }
    for (double level : lambdas.level_prime) {
        if (level < 0.0 || !std::isfinite(level)) {
            fail(ErrorKind::InvalidInput, "multiplier levels must be nonnegative");
        }
    }

    const std::size_t np = g.pairs.size();
    const std::size_t d = g.x.cols();
    const std::size_t dr = g.z.cols();
    const std::size_t nz = g.z.rows();

    GameState s;
    s.w = DataMatrix(dr, d, 0.0);
    s.r.assign(np, std::vector<double>(d, 0.0));
    s.r_prime.assign(np, std::vector<double>(d, 0.0));
    s.lambda.resize(np);
    s.lambda_prime.resize(np);
    for (std::size_t p = 0; p < np; ++p) {
        s.lambda[p].assign(nz, lambdas.level[p]);
        s.lambda_prime[p].assign(nz, lambdas.level_prime[p]);
    }

    const std::vector<PairGeometry> geo = pair_geometry(g, s);
    std::vector<std::vector<std::vector<double>>> normals(np);
    for (std::size_t p = 0; p < np; ++p) {
        normals[p] = cone_normals(g.x, g.h_x.patterns[g.pairs[p].j1].pattern);
    }

    // Stability scale from the bilinear coupling: columns (q − zh) and
    // (q' + zh), one pair of columns per block.
    DataMatrix coupling(dr, 2 * np, 0.0);
    for (std::size_t p = 0; p < np; ++p) {
        for (std::size_t i = 0; i < dr; ++i) {
            coupling(i, 2 * p) = geo[p].q[i] - geo[p].zh[i];
            coupling(i, 2 * p + 1) = geo[p].q_prime[i] + geo[p].zh[i];
        }
    }
    const double op = np > 0 ? spectral_norm(coupling) : 0.0;
    const double tau = op > 0.0 ? step / op : step;
    const double sigma = tau;

    DataMatrix w_prev = s.w;
    for (std::size_t it = 0; it < iters; ++it) {
        // Extrapolated weights drive the block ascent.
        DataMatrix wbar = s.w;
        for (std::size_t i = 0; i < dr; ++i) {
            for (std::size_t j = 0; j < d; ++j) wbar(i, j) = 2.0 * s.w(i, j) - w_prev(i, j);
        }
        for (std::size_t p = 0; p < np; ++p) {
            const std::vector<double> b = mat_t_vec(wbar, geo[p].zh);
            const std::vector<double> wq = mat_t_vec(wbar, geo[p].q);
            const std::vector<double> wq_prime = mat_t_vec(wbar, geo[p].q_prime);
            for (std::size_t j = 0; j < d; ++j) {
                s.r[p][j] += sigma * (geo[p].a[j] - b[j] + wq[j]);
                s.r_prime[p][j] += sigma * (-(geo[p].a[j] - b[j]) + wq_prime[j]);
            }
            shrink_block(s.r[p], sigma * g.beta_d);
            shrink_block(s.r_prime[p], sigma * g.beta_d);
            s.r[p] = project_polyhedral_cone(s.r[p], normals[p]);
            s.r_prime[p] = project_polyhedral_cone(s.r_prime[p], normals[p]);
        }
        const DataMatrix grad = w_gradient(s, g, geo);
        w_prev = s.w;
        for (std::size_t i = 0; i < dr; ++i) {
            for (std::size_t j = 0; j < d; ++j) s.w(i, j) -= tau * grad(i, j);
        }

        if ((it & 63u) == 0u || it + 1 == iters) {
            double scale = frobenius_norm(s.w);
            for (std::size_t p = 0; p < np; ++p) {
                scale = std::max(scale, std::max(norm2(s.r[p]), norm2(s.r_prime[p])));
            }
            if (!(scale <= 1e6)) {
                fail(ErrorKind::Diverged,
                     "iterates exceeded 1e6 at step scale " + std::to_string(step));
            }
        }
    }
    s.saddle_residual_value = saddle_residual(s, g, 16);
    return s;
}

double saddle_residual(const GameState& s, const GameInstance& g, std::size_t probe_count) {
    if (probe_count < 1) fail(ErrorKind::InvalidInput, "need at least one probe");
    check_state_shapes(s, g);
    const std::vector<PairGeometry> geo = pair_geometry(g, s);
    const double f0 = game_objective(s, g);

    // Decrease available to the weights along the negative gradient.
    const DataMatrix grad = w_gradient(s, g, geo);
    double best_f = f0;
    const double gn = frobenius_norm(grad);
    if (gn > 0.0) {
        double t = 4.0 / (1.0 + gn);
        for (std::size_t j = 0; j < probe_count; ++j) {
            GameState probe = s;
            for (std::size_t i = 0; i < g.z.cols(); ++i) {
                for (std::size_t c = 0; c < g.x.cols(); ++c) {
                    probe.w(i, c) = s.w(i, c) - t * grad(i, c);
                }
            }
            best_f = std::min(best_f, game_objective(probe, g));
            t *= 0.5;
        }
    }
    const double w_gain = f0 - best_f;

    // Largest increase any single block can reach with its capped best
    // response: along the cone-projected linear coefficient, the concave
    // profile t·(‖proj‖ − β) is maximal at the cap.
    double cap = 1.0;
    for (std::size_t p = 0; p < g.pairs.size(); ++p) {
        cap = std::max(cap, 2.0 * std::max(norm2(s.r[p]), norm2(s.r_prime[p])));
    }
    double block_gain = 0.0;
    for (std::size_t p = 0; p < g.pairs.size(); ++p) {
        const auto normals = cone_normals(g.x, g.h_x.patterns[g.pairs[p].j1].pattern);
        const std::vector<double> b = mat_t_vec(s.w, geo[p].zh);
        const std::vector<double> wq = mat_t_vec(s.w, geo[p].q);
        const std::vector<double> wq_prime = mat_t_vec(s.w, geo[p].q_prime);
        std::vector<double> coef(g.x.cols()), coef_prime(g.x.cols());
        for (std::size_t j = 0; j < g.x.cols(); ++j) {
            coef[j] = geo[p].a[j] - b[j] + wq[j];
            coef_prime[j] = -(geo[p].a[j] - b[j]) + wq_prime[j];
        }
        const double cur = dot(coef, s.r[p]) - g.beta_d * norm2(s.r[p]);
        const double cur_prime = dot(coef_prime, s.r_prime[p]) - g.beta_d * norm2(s.r_prime[p]);
        const double reach = norm2(project_polyhedral_cone(coef, normals));
        const double reach_prime = norm2(project_polyhedral_cone(coef_prime, normals));
        const double best = std::max(0.0, cap * (reach - g.beta_d));
        const double best_prime = std::max(0.0, cap * (reach_prime - g.beta_d));
        block_gain = std::max(block_gain, best - cur);
        block_gain = std::max(block_gain, best_prime - cur_prime);
    }
    return w_gain + std::max(0.0, block_gain);
}

}  // namespace cwgan
