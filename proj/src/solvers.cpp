#include "cwgan/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <string>
#include <utility>

#include "cwgan/errors.hpp"
#include "cwgan/generator.hpp"
#include "cwgan/numerics.hpp"
#include "cwgan/rng.hpp"

namespace cwgan {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::vector<double> flatten(const DataMatrix& m) {
    return std::vector<double>(m.data(), m.data() + m.size());
}

// Midpoint-convexity spot check for user-supplied penalties; a silent
// non-convex evaluator would invalidate every optimality certificate below.
void validate_custom_regularizer(const Regularizer& reg, std::size_t dim) {
    if (reg.kind != Regularizer::Kind::Custom) return;
    if (!reg.value_fn || !reg.subgrad_fn) {
        fail(ErrorKind::InvalidInput, "custom regularizer needs value and subgradient");
    }
    if (dim == 0) return;
    const CounterRng rng(12345, 0xC7C7);
    for (std::size_t pair = 0; pair < 8; ++pair) {
        std::vector<double> x(dim), y(dim), mid(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            x[j] = rng.gaussian(2 * (pair * dim + j));
            y[j] = rng.gaussian(2 * (pair * dim + j) + 1);
            mid[j] = 0.5 * (x[j] + y[j]);
        }
        const double lhs = reg.value(mid);
        const double rhs = 0.5 * (reg.value(x) + reg.value(y));
        if (lhs > rhs + 1e-9) {
            fail(ErrorKind::InvalidInput, "custom regularizer fails midpoint convexity");
        }
    }
}

// prox_{τ·reg}(v), exact for the built-in kinds; iterative refinement for
// Custom (the final KKT gate re-verifies with the true subgradient).
std::vector<double> prox_reg(const Regularizer& reg, const std::vector<double>& v, double tau) {
    std::vector<double> out(v.size());
    const double c = reg.weight;
    switch (reg.kind) {
        case Regularizer::Kind::SquaredFrobenius: {
            const double scale = 1.0 / (1.0 + 2.0 * tau * c);
            for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * scale;
            return out;
        }
        case Regularizer::Kind::LpToTheP: {
            const double p = reg.p;
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double mag = std::abs(v[i]);
                const double sign = v[i] >= 0.0 ? 1.0 : -1.0;
                if (p == 1.0) {
                    out[i] = sign * std::max(0.0, mag - tau * c);
                } else if (p == 2.0) {
                    out[i] = v[i] / (1.0 + 2.0 * tau * c);
                } else {
                    // Root of u + τ·c·p·u^(p−1) = |v| on [0, |v|]; the left side
                    // is strictly increasing, so bisection is safe.
                    double lo = 0.0, hi = mag;
                    for (int it = 0; it < 80; ++it) {
                        const double u = 0.5 * (lo + hi);
                        const double f = u + tau * c * p * std::pow(u, p - 1.0) - mag;
                        if (f > 0.0) hi = u; else lo = u;
                    }
                    out[i] = sign * 0.5 * (lo + hi);
                }
            }
            return out;
        }
        case Regularizer::Kind::Custom: {
            // Proximal point by subgradient descent on the (1/τ)-strongly
            // convex prox objective.
            out = v;
            std::vector<double> best = v;
            double best_val = reg.value(v);
            for (int it = 0; it < 120; ++it) {
                std::vector<double> g = reg.subgradient(out);
                for (std::size_t i = 0; i < v.size(); ++i) g[i] += (out[i] - v[i]) / tau;
                const double step = tau / (it + 2.0);
                for (std::size_t i = 0; i < v.size(); ++i) out[i] -= step * g[i];
                double val = reg.value(out);
                for (std::size_t i = 0; i < v.size(); ++i) {
                    val += (out[i] - v[i]) * (out[i] - v[i]) / (2.0 * tau);
                }
                if (val < best_val) {
                    best_val = val;
                    best = out;
                }
            }
            return best;
        }
    }
    fail(ErrorKind::InvalidInput, "unknown regularizer kind");
}

// A subgradient of reg at w chosen as close as possible to `target`
// (relevant only where the subdifferential is set-valued: L1 at zero).
std::vector<double> nearest_subgradient(const Regularizer& reg, const std::vector<double>& w,
                                        const std::vector<double>& target) {
    if (reg.kind == Regularizer::Kind::LpToTheP && reg.p == 1.0) {
        std::vector<double> g(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] > 0.0) {
                g[i] = reg.weight;
            } else if (w[i] < 0.0) {
                g[i] = -reg.weight;
            } else {
                g[i] = std::clamp(target[i], -reg.weight, reg.weight);
            }
        }
        return g;
    }
    return reg.subgradient(w);
}

DataMatrix rows_to_matrix(const AbsConstraintSystem& sys) {
    DataMatrix a(sys.rows.size(), sys.dim);
    for (std::size_t j = 0; j < sys.rows.size(); ++j) {
        for (std::size_t i = 0; i < sys.dim; ++i) a(j, i) = sys.rows[j].a[i];
    }
    return a;
}

// Minimum-norm solution of a x = rhs via the thin SVD (rank decided at
// 1e-12 relative).
std::vector<double> least_squares_min_norm(const DataMatrix& a, const std::vector<double>& rhs) {
    const SvdResult s = svd(a);
    const double cutoff =
        (s.singular_values.empty() ? 0.0 : s.singular_values[0]) * 1e-12;
    std::vector<double> x(a.cols(), 0.0);
    for (std::size_t k = 0; k < s.singular_values.size(); ++k) {
        if (s.singular_values[k] <= cutoff) continue;
        double coef = 0.0;
        for (std::size_t r = 0; r < a.rows(); ++r) coef += s.U(r, k) * rhs[r];
        coef /= s.singular_values[k];
        for (std::size_t i = 0; i < a.cols(); ++i) x[i] += s.V(i, k) * coef;
    }
    return x;
}

}  // namespace

// ------------------------------------------------------------- Regularizer

Regularizer Regularizer::squared_frobenius(double weight) {
    if (weight < 0.0 || !std::isfinite(weight)) {
        fail(ErrorKind::InvalidInput, "regularizer weight must be a nonnegative real");
    }
    Regularizer r;
    r.kind = Kind::SquaredFrobenius;
    r.weight = weight;
    return r;
}

Regularizer Regularizer::lp_to_the_p(double p, double weight) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
        fail(ErrorKind::InvalidInput, "Lp regularizer requires p >= 1");
    }
    if (weight < 0.0 || !std::isfinite(weight)) {
        fail(ErrorKind::InvalidInput, "regularizer weight must be a nonnegative real");
    }
    Regularizer r;
    r.kind = Kind::LpToTheP;
    r.p = p;
    r.weight = weight;
    return r;
}

Regularizer Regularizer::custom(std::function<double(const std::vector<double>&)> value,
                                std::function<std::vector<double>(const std::vector<double>&)> grad,
                                double weight) {
    if (!value || !grad) {
        fail(ErrorKind::InvalidInput, "custom regularizer needs value and subgradient");
    }
    Regularizer r;
    r.kind = Kind::Custom;
    r.weight = weight;
    r.value_fn = std::move(value);
    r.subgrad_fn = std::move(grad);
    return r;
}

double Regularizer::value(const std::vector<double>& w) const {
    switch (kind) {
        case Kind::SquaredFrobenius:
            return weight * norm2_squared(w);
        case Kind::LpToTheP: {
            double total = 0.0;
            for (double t : w) total += std::pow(std::abs(t), p);
            return weight * total;
        }
        case Kind::Custom:
            return weight * value_fn(w);
    }
    fail(ErrorKind::InvalidInput, "unknown regularizer kind");
}

std::vector<double> Regularizer::subgradient(const std::vector<double>& w) const {
    switch (kind) {
        case Kind::SquaredFrobenius: {
            std::vector<double> g(w.size());
            for (std::size_t i = 0; i < w.size(); ++i) g[i] = 2.0 * weight * w[i];
            return g;
        }
        case Kind::LpToTheP: {
            std::vector<double> g(w.size());
            for (std::size_t i = 0; i < w.size(); ++i) {
                if (w[i] == 0.0) {
                    g[i] = 0.0;  // valid member of the subdifferential for every p ≥ 1
                } else {
                    const double sign = w[i] > 0.0 ? 1.0 : -1.0;
                    g[i] = weight * p * sign * std::pow(std::abs(w[i]), p - 1.0);
                }
            }
            return g;
        }
        case Kind::Custom: {
            std::vector<double> g = subgrad_fn(w);
            for (double& t : g) t *= weight;
            return g;
        }
    }
    fail(ErrorKind::InvalidInput, "unknown regularizer kind");
}

double AbsConstraintSystem::violation(const std::vector<double>& w) const {
    double worst = 0.0;
    for (const Row& row : rows) {
        const double v = std::abs(dot(row.a, w) + row.b);
        worst = std::max(worst, v - bound);
    }
    return std::max(worst, 0.0);
}

// ------------------------------------------------------ spectral shrinkage

DataMatrix svt_generator(const DataMatrix& x, double beta_d, const OrthogonalChoice& orient) {
    if (!(beta_d > 0.0) || !std::isfinite(beta_d)) {
        fail(ErrorKind::InvalidInput, "beta_d must be a positive real");
    }
    require_finite(x, "svt input");
    const SvdResult s = svd(x);
    const std::size_t r = s.singular_values.size();
    const std::size_t d = x.cols();
    std::vector<double> shrunk(r);
    for (std::size_t i = 0; i < r; ++i) {
        shrunk[i] = std::sqrt(std::max(0.0, s.singular_values[i] * s.singular_values[i] - beta_d));
    }

    // Middle factor rows: shrunk_i · v_i^T; then apply the orthonormal L.
    DataMatrix core(r, d);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < d; ++j) core(i, j) = shrunk[i] * s.V(j, i);
    }
    switch (orient.kind) {
        case OrthogonalChoice::Kind::Identity:
            return core;
        case OrthogonalChoice::Kind::UAligned:
            return matmul(s.U, core);
        case OrthogonalChoice::Kind::Given: {
            const DataMatrix& q = orient.q;
            if (q.cols() != r || q.rows() < r) {
                fail(ErrorKind::DimensionMismatch,
                     "orthonormal factor must have one column per singular value");
            }
            DataMatrix qtq = gram(q);
            for (std::size_t i = 0; i < r; ++i) qtq(i, i) -= 1.0;
            if (max_abs_entry(qtq) > 1e-8) {
                fail(ErrorKind::InvalidInput, "provided factor is not orthonormal");
            }
            return matmul(q, core);
        }
    }
    fail(ErrorKind::InvalidInput, "unknown orthogonal choice");
}

std::size_t thresholded_rank(const DataMatrix& x, double beta_d) {
    if (!(beta_d > 0.0) || !std::isfinite(beta_d)) {
        fail(ErrorKind::InvalidInput, "beta_d must be a positive real");
    }
    require_finite(x, "data matrix");
    const SvdResult sx = svd(x);
    std::size_t k = 0;
    for (double sv : sx.singular_values) {
        if (sv * sv >= beta_d) ++k;
    }
    return k;
}

DataMatrix closed_form_linear_weights(const DataMatrix& z, const DataMatrix& x, double beta_d) {
    return closed_form_linear_weights(z, x, beta_d, DataMatrix());
}

DataMatrix closed_form_linear_weights(const DataMatrix& z, const DataMatrix& x, double beta_d,
                                      const DataMatrix& mixer) {
    if (!(beta_d > 0.0) || !std::isfinite(beta_d)) {
        fail(ErrorKind::InvalidInput, "beta_d must be a positive real");
    }
    require_finite(z, "latent matrix");
    require_finite(x, "data matrix");
    const std::size_t dr = z.cols();
    const std::size_t d = x.cols();

    const SvdResult sx = svd(x);
    std::size_t k = 0;
    for (double sv : sx.singular_values) {
        if (sv * sv >= beta_d) ++k;
    }
    if (mixer.size() != 0) {
        if (mixer.rows() != k || mixer.cols() != k) {
            fail(ErrorKind::DimensionMismatch,
                 "mixer must be " + std::to_string(k) + "x" + std::to_string(k));
        }
        DataMatrix mtm = gram(mixer);
        for (std::size_t i = 0; i < k; ++i) mtm(i, i) -= 1.0;
        if (max_abs_entry(mtm) > 1e-8) {
            fail(ErrorKind::InvalidInput, "mixer is not orthonormal");
        }
    }
    if (k == 0) return DataMatrix(dr, d, 0.0);

    const DataMatrix ztz = gram(z);
    const EigResult ez = sym_eig(ztz);
    const double lam_max = ez.eigenvalues.front();
    std::size_t z_rank = 0;
    for (double lam : ez.eigenvalues) {
        if (lam_max > 0.0 && lam >= kRankCutoff * lam_max) ++z_rank;
    }
    if (z_rank < k) {
        fail(ErrorKind::RankDeficient,
             "latent rank " + std::to_string(z_rank) + " below required mode count " +
                 std::to_string(k));
    }

    // W* = pinv_sqrt(Z^TZ, k) · Q_k L (Σ_k² − β)_+^{1/2} V_k^T; aligning the
    // middle factor with the eigenbasis of Z^TZ makes (ZW*)^T(ZW*) equal the
    // thresholded spectrum exactly, for any orthonormal L.
    DataMatrix mid(k, d, 0.0);
    for (std::size_t m = 0; m < k; ++m) {
        const double sv = sx.singular_values[m];
        const double shrunk = std::sqrt(std::max(0.0, sv * sv - beta_d));
        if (mixer.size() == 0) {
            for (std::size_t j = 0; j < d; ++j) mid(m, j) = shrunk * sx.V(j, m);
        } else {
            for (std::size_t t = 0; t < k; ++t) {
                const double lw = mixer(t, m) * shrunk;
                if (lw == 0.0) continue;
                for (std::size_t j = 0; j < d; ++j) mid(t, j) += lw * sx.V(j, m);
            }
        }
    }
    DataMatrix aligned(dr, d, 0.0);
    for (std::size_t t = 0; t < k; ++t) {
        for (std::size_t i = 0; i < dr; ++i) {
            const double qe = ez.eigenvectors(i, t);
            if (qe == 0.0) continue;
            for (std::size_t j = 0; j < d; ++j) {
                aligned(i, j) += qe * mid(t, j);
            }
        }
    }
    return matmul(pinv_sqrt(ztz, k), aligned);
}

DataMatrix mean_match_weights(const DataMatrix& z, const DataMatrix& x, double beta_d,
                              const Regularizer& reg) {
    if (beta_d < 0.0 || !std::isfinite(beta_d)) {
        fail(ErrorKind::InvalidInput, "beta_d must be nonnegative");
    }
    require_finite(z, "latent matrix");
    require_finite(x, "data matrix");
    const std::size_t dr = z.cols();
    const std::size_t d = x.cols();
    validate_custom_regularizer(reg, dr * d);

    const std::vector<double> s = column_sums(x);
    const std::vector<double> zbar = column_sums(z);
    const double zn2 = norm2_squared(zbar);
    const double sn = norm2(s);

    if (zn2 <= 1e-28 * std::max(1.0, frobenius_norm_squared(z))) {
        if (sn <= beta_d + 1e-12) return DataMatrix(dr, d, 0.0);
        fail(ErrorKind::Infeasible,
             "latent column sums vanish; the first-moment target is unreachable");
    }

    // Optimal reachable mean: pull the target toward the origin by beta_d.
    std::vector<double> t(d, 0.0);
    if (sn > beta_d) {
        const double scale = 1.0 - beta_d / sn;
        for (std::size_t j = 0; j < d; ++j) t[j] = s[j] * scale;
    }
    // Least-norm solve of the single row equation (1^TZ)·W = t.
    DataMatrix w(dr, d);
    for (std::size_t i = 0; i < dr; ++i) {
        for (std::size_t j = 0; j < d; ++j) w(i, j) = zbar[i] * t[j] / zn2;
    }
    if (reg.kind == Regularizer::Kind::SquaredFrobenius) return w;

    // General penalties: projected subgradient descent on the constraint set
    // {W : ‖1^TX − 1^TZW‖₂ ≤ β_d}, warm-started from the Frobenius solution.
    auto project = [&](DataMatrix& m) {
        std::vector<double> t0(d, 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t i = 0; i < dr; ++i) t0[j] += zbar[i] * m(i, j);
        }
        std::vector<double> delta(d);
        for (std::size_t j = 0; j < d; ++j) delta[j] = t0[j] - s[j];
        const double nd = norm2(delta);
        if (nd <= beta_d) return;
        const double shrink = beta_d / nd;
        for (std::size_t j = 0; j < d; ++j) {
            const double target_j = s[j] + delta[j] * shrink;
            const double corr = (target_j - t0[j]) / zn2;
            for (std::size_t i = 0; i < dr; ++i) m(i, j) += zbar[i] * corr;
        }
    };

    DataMatrix best = w;
    double best_val = reg.value(flatten(w));
    DataMatrix cur = w;
    const std::vector<double> g0 = reg.subgradient(flatten(cur));
    const double step0 = 0.5 * (1.0 + frobenius_norm(w)) / (1.0 + norm2(g0));
    for (int it = 0; it < 40000; ++it) {
        const std::vector<double> g = reg.subgradient(flatten(cur));
        const double step = step0 / std::sqrt(it + 1.0);
        for (std::size_t i = 0; i < dr; ++i) {
            for (std::size_t j = 0; j < d; ++j) cur(i, j) -= step * g[i * d + j];
        }
        project(cur);
        const double val = reg.value(flatten(cur));
        if (val < best_val) {
            best_val = val;
            best = cur;
        }
    }
    return best;
}

// ------------------------------------------------- generic |.| ≤ β engine

std::vector<double> solve_abs_constrained(const Regularizer& reg, const AbsConstraintSystem& sys,
                                          double tol) {
    if (!(tol > 0.0)) fail(ErrorKind::InvalidInput, "tolerance must be positive");
    if (sys.bound < 0.0 || !std::isfinite(sys.bound)) {
        fail(ErrorKind::InvalidInput, "constraint bound must be nonnegative");
    }
    const std::size_t n = sys.dim;
    for (const auto& row : sys.rows) {
        if (row.a.size() != n) fail(ErrorKind::DimensionMismatch, "constraint row width");
        for (double t : row.a) {
            if (!std::isfinite(t)) fail(ErrorKind::InvalidInput, "non-finite coefficient");
        }
        if (!std::isfinite(row.b)) fail(ErrorKind::InvalidInput, "non-finite offset");
    }
    validate_custom_regularizer(reg, n);

    std::vector<double> w(n, 0.0);
    if (sys.rows.empty()) {
        if (reg.kind != Regularizer::Kind::Custom) return w;  // norm-type minimum at 0
        // Unconstrained custom penalty: plain subgradient descent.
        std::vector<double> best = w;
        double best_val = reg.value(w);
        for (int it = 0; it < 4000; ++it) {
            const std::vector<double> g = reg.subgradient(w);
            const double step = 1.0 / (it + 2.0);
            for (std::size_t i = 0; i < n; ++i) w[i] -= step * g[i];
            const double val = reg.value(w);
            if (val < best_val) {
                best_val = val;
                best = w;
            }
        }
        return best;
    }

    const std::size_t m = sys.rows.size();
    const DataMatrix a = rows_to_matrix(sys);
    std::vector<double> lo(m), hi(m);
    for (std::size_t j = 0; j < m; ++j) {
        lo[j] = -sys.bound - sys.rows[j].b;
        hi[j] = sys.bound - sys.rows[j].b;
    }
    const double a_norm = spectral_norm(a);

    // Phase 1: minimize the squared distance to the constraint box; certifies
    // infeasibility if the violation cannot be brought under tol.
    if (a_norm > 0.0) {
        const double lip = a_norm * a_norm;
        for (int it = 0; it < 20000 && sys.violation(w) > 0.25 * tol; ++it) {
            std::vector<double> v = matvec(a, w);
            for (std::size_t j = 0; j < m; ++j) {
                const double clamped = std::clamp(v[j] + sys.rows[j].b, lo[j] + sys.rows[j].b,
                                                  hi[j] + sys.rows[j].b);
                v[j] = (v[j] + sys.rows[j].b) - clamped;
            }
            const std::vector<double> grad = matvec_transposed(a, v);
            const double gn = norm2(grad);
            if (gn <= 1e-300) break;
            for (std::size_t i = 0; i < n; ++i) w[i] -= grad[i] / lip;
        }
    }
    if (sys.violation(w) > tol) {
        fail(ErrorKind::Infeasible, "feasibility phase stalled at violation " +
                                        std::to_string(sys.violation(w)));
    }
    if (a_norm == 0.0) return std::vector<double>(n, 0.0);

    // Phase 2: primal-dual splitting between the penalty prox and the
    // per-row interval projection, verified by a stationarity residual.
    const double tau = 0.99 / a_norm;
    const double sigma = 0.99 / a_norm;
    std::vector<double> y(m, 0.0);
    std::vector<double> wbar = w;
    const int max_iter = 400000;
    for (int it = 1; it <= max_iter; ++it) {
        const std::vector<double> aw = matvec(a, wbar);
        for (std::size_t j = 0; j < m; ++j) {
            const double cand = y[j] + sigma * aw[j];
            y[j] = cand - sigma * std::clamp(cand / sigma, lo[j], hi[j]);
        }
        const std::vector<double> aty = matvec_transposed(a, y);
        std::vector<double> w_in(n);
        for (std::size_t i = 0; i < n; ++i) w_in[i] = w[i] - tau * aty[i];
        const std::vector<double> w_new = prox_reg(reg, w_in, tau);
        for (std::size_t i = 0; i < n; ++i) wbar[i] = 2.0 * w_new[i] - w[i];
        w = w_new;

        if (it % 50 == 0 || it == max_iter) {
            if (sys.violation(w) > 0.5 * tol) continue;
            std::vector<double> target(n);
            const std::vector<double> aty_now = matvec_transposed(a, y);
            for (std::size_t i = 0; i < n; ++i) target[i] = -aty_now[i];
            const std::vector<double> g = nearest_subgradient(reg, w, target);
            double resid = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                resid += (g[i] + aty_now[i]) * (g[i] + aty_now[i]);
            }
            resid = std::sqrt(resid);
            if (resid <= tol * std::max(1.0, norm2(aty_now))) return w;
        }
    }
    fail(ErrorKind::Diverged, "stationarity residual did not reach tolerance");
}

// ------------------------------------------------------ 1-D interleaving

AbsConstraintSystem build_1d_constraints(const std::vector<double>& x, double beta_d) {
    if (x.empty()) fail(ErrorKind::InvalidInput, "need at least one data point");
    for (double t : x) {
        if (!std::isfinite(t)) fail(ErrorKind::InvalidInput, "non-finite data point");
    }
    if (beta_d < 0.0 || !std::isfinite(beta_d)) {
        fail(ErrorKind::InvalidInput, "beta_d must be nonnegative");
    }
    std::vector<double> xs = x;
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (xs[i + 1] == xs[i]) fail(ErrorKind::InvalidInput, "duplicate data points");
        min_gap = std::min(min_gap, xs[i + 1] - xs[i]);
    }

    AbsConstraintSystem sys;
    sys.dim = n;
    sys.bound = beta_d;
    sys.beta_warning = (n >= 2 && beta_d > min_gap);

    // Interleaved sequence x̃: odd positions carry data values (sign +1),
    // even positions carry the unknowns w (sign −1).
    struct Affine {
        std::vector<double> coef;
        double cst = 0.0;
    };
    auto term = [&](std::size_t i /*1-based*/) {
        Affine t;
        t.coef.assign(n, 0.0);
        if (i % 2 == 1) {
            t.cst = xs[(i + 1) / 2 - 1];
        } else {
            t.coef[i / 2 - 1] = 1.0;
        }
        return t;
    };
    auto sign_of = [](std::size_t i) { return i % 2 == 1 ? 1.0 : -1.0; };

    std::set<std::pair<std::vector<double>, double>> seen;
    auto push_row = [&](Affine row) {
        bool all_zero = true;
        for (double t : row.coef) {
            if (t != 0.0) all_zero = false;
        }
        if (all_zero && std::abs(row.cst) <= beta_d) return;  // vacuous
        // Canonical sign for two-sided rows: first nonzero entry positive.
        double lead = row.cst;
        for (double t : row.coef) {
            if (t != 0.0) {
                lead = t;
                break;
            }
        }
        if (lead < 0.0) {
            for (double& t : row.coef) t = -t;
            row.cst = -row.cst;
        }
        if (!seen.insert({row.coef, row.cst}).second) return;
        AbsConstraintSystem::Row out;
        out.a = std::move(row.coef);
        out.b = row.cst;
        sys.rows.push_back(std::move(out));
    };

    const std::size_t len = 2 * n;
    for (std::size_t j = 1; j <= len; ++j) {
        const Affine xj = term(j);
        // Σ_{i=j}^{2n} s_i (x̃_i − x̃_j)
        Affine right;
        right.coef.assign(n, 0.0);
        double sign_sum = 0.0;
        for (std::size_t i = j; i <= len; ++i) {
            const Affine xi = term(i);
            const double s = sign_of(i);
            for (std::size_t kk = 0; kk < n; ++kk) right.coef[kk] += s * xi.coef[kk];
            right.cst += s * xi.cst;
            sign_sum += s;
        }
        for (std::size_t kk = 0; kk < n; ++kk) right.coef[kk] -= sign_sum * xj.coef[kk];
        right.cst -= sign_sum * xj.cst;
        push_row(std::move(right));

        // Σ_{i=1}^{j} s_i (x̃_j − x̃_i)
        Affine left;
        left.coef.assign(n, 0.0);
        sign_sum = 0.0;
        for (std::size_t i = 1; i <= j; ++i) {
            const Affine xi = term(i);
            const double s = sign_of(i);
            for (std::size_t kk = 0; kk < n; ++kk) left.coef[kk] -= s * xi.coef[kk];
            left.cst -= s * xi.cst;
            sign_sum += s;
        }
        for (std::size_t kk = 0; kk < n; ++kk) left.coef[kk] += sign_sum * xj.coef[kk];
        left.cst += sign_sum * xj.cst;
        push_row(std::move(left));
    }
    return sys;
}

std::vector<double> solve_1d_relu_program(const std::vector<double>& x, double beta_d,
                                          const Regularizer& reg, double tol) {
    const AbsConstraintSystem sys = build_1d_constraints(x, beta_d);
    return solve_abs_constrained(reg, sys, tol);
}

// ------------------------------------------------------ generator recovery

std::vector<double> project_polyhedral_cone(const std::vector<double>& h,
                                            const std::vector<std::vector<double>>& normals) {
    const std::size_t d = h.size();
    std::vector<double> out = h;
    if (d == 1) {
        bool need_pos = false, need_neg = false;
        for (const auto& c : normals) {
            if (c[0] > 0.0) need_pos = true;
            if (c[0] < 0.0) need_neg = true;
        }
        if (need_pos && need_neg) {
            out[0] = 0.0;
        } else if (need_pos) {
            out[0] = std::max(0.0, out[0]);
        } else if (need_neg) {
            out[0] = std::min(0.0, out[0]);
        }
        return out;
    }
    if (d == 2) {
        // Allowed directions form an arc: intersect the half-circles
        // {θ : cos(θ − φ_i) ≥ 0}. Track the arc as [lo, hi].
        bool any = false;
        double lo = 0.0, hi = kTwoPi;
        for (const auto& c : normals) {
            const double nc = std::hypot(c[0], c[1]);
            if (nc == 0.0) continue;
            const double phi = std::atan2(c[1], c[0]);
            double a = phi - 0.25 * kTwoPi;
            double b = phi + 0.25 * kTwoPi;
            if (!any) {
                lo = a;
                hi = b;
                any = true;
                continue;
            }
            // Shift [a, b] by multiples of 2π to overlap [lo, hi].
            while (b < lo) {
                a += kTwoPi;
                b += kTwoPi;
            }
            while (a > hi) {
                a -= kTwoPi;
                b -= kTwoPi;
            }
            lo = std::max(lo, a);
            hi = std::min(hi, b);
            if (lo > hi + 1e-15) return {0.0, 0.0};  // cone degenerates to origin
        }
        if (!any) return out;  // no active normals: whole plane
        const double nh = std::hypot(out[0], out[1]);
        if (nh == 0.0) return out;
        double theta = std::atan2(out[1], out[0]);
        while (theta < lo) theta += kTwoPi;
        while (theta > lo + kTwoPi) theta -= kTwoPi;
        if (theta <= hi) return out;  // already inside the arc
        double best_val = 0.0;
        std::vector<double> best = {0.0, 0.0};
        for (double bound : {lo, hi}) {
            const std::vector<double> dir = {std::cos(bound), std::sin(bound)};
            const double t = out[0] * dir[0] + out[1] * dir[1];
            if (t > best_val) {
                best_val = t;
                best = {t * dir[0], t * dir[1]};
            }
        }
        return best;
    }
    for (int round = 0; round < 200; ++round) {
        for (const auto& c : normals) {
            const double cn2 = norm2_squared(c);
            if (cn2 == 0.0) continue;
            const double v = dot(c, out);
            if (v < 0.0) {
                for (std::size_t i = 0; i < d; ++i) out[i] -= v * c[i] / cn2;
            }
        }
    }
    return out;
}

RecoveryResult generator_recovery(const DataMatrix& z, const DataMatrix& g_star,
                                  const ArrangementSet& arrangements, double tol) {
    if (!(tol > 0.0)) fail(ErrorKind::InvalidInput, "tolerance must be positive");
    if (!arrangements.complete) {
        fail(ErrorKind::IncompleteArrangements,
             "recovery requires an exhaustive arrangement enumeration");
    }
    if (z.rows() != g_star.rows()) {
        fail(ErrorKind::DimensionMismatch, "latents and targets disagree on sample count");
    }
    require_finite(z, "latent matrix");
    require_finite(g_star, "target matrix");
    for (const auto& p : arrangements.patterns) {
        if (p.pattern.size() != z.rows()) {
            fail(ErrorKind::DimensionMismatch, "pattern length vs latent rows");
        }
        if (p.has_bias && p.bias != 0.0) {
            fail(ErrorKind::InvalidInput, "biased arrangements are not supported in recovery");
        }
    }

    const std::size_t n = z.rows();
    const std::size_t dr = z.cols();
    const std::size_t d = g_star.cols();
    const std::size_t np = arrangements.patterns.size();
    const std::size_t block = dr;           // one atom = one d_r-vector
    const std::size_t nvar = 2 * np * block;  // u-atoms then v-atoms

    // K stacks the output-matching rows with every cone row.
    const std::size_t eq_rows = n;
    const std::size_t cone_rows = 2 * np * n;
    DataMatrix k_mat(eq_rows + cone_rows, nvar, 0.0);
    for (std::size_t p = 0; p < np; ++p) {
        const auto& bits = arrangements.patterns[p].pattern;
        for (std::size_t r = 0; r < n; ++r) {
            const double mask = bits[r] ? 1.0 : 0.0;
            const double sign = bits[r] ? 1.0 : -1.0;
            for (std::size_t jcol = 0; jcol < dr; ++jcol) {
                const double zval = z(r, jcol);
                // Output rows: Σ_p H^(p) Z (u_p − v_p).
                k_mat(r, p * block + jcol) += mask * zval;
                k_mat(r, (np + p) * block + jcol) -= mask * zval;
                // Cone rows: (2H−I)Z u ≥ 0 and likewise for v.
                k_mat(eq_rows + p * n + r, p * block + jcol) = sign * zval;
                k_mat(eq_rows + (np + p) * n + r, (np + p) * block + jcol) = sign * zval;
            }
        }
    }
    const double k_norm = spectral_norm(k_mat);
    const double tau = k_norm > 0.0 ? 0.95 / k_norm : 1.0;
    const double sigma = tau;

    RecoveryResult result;
    result.w1 = DataMatrix(dr, 0, 0.0);
    std::vector<std::vector<double>> w1_cols;
    std::vector<std::vector<double>> w2_rows;  // length-d rows, one per neuron
    double objective = 0.0;

    for (std::size_t col = 0; col < d; ++col) {
        std::vector<double> target(n);
        for (std::size_t r = 0; r < n; ++r) target[r] = g_star(r, col);
        const double target_scale = std::max(1.0, norm2(target));

        std::vector<double> xi(nvar, 0.0), xibar(nvar, 0.0), y(eq_rows + cone_rows, 0.0);
        bool converged = norm2(target) == 0.0;
        const int max_iter = 200000;
        for (int it = 1; it <= max_iter && !converged; ++it) {
            const std::vector<double> kx = matvec(k_mat, xibar);
            for (std::size_t r = 0; r < eq_rows; ++r) y[r] += sigma * (kx[r] - target[r]);
            for (std::size_t r = eq_rows; r < y.size(); ++r) {
                y[r] = std::min(y[r] + sigma * kx[r], 0.0);
            }
            const std::vector<double> kty = matvec_transposed(k_mat, y);
            std::vector<double> nxt(nvar);
            for (std::size_t i = 0; i < nvar; ++i) nxt[i] = xi[i] - tau * kty[i];
            // Group shrinkage block by block.
            for (std::size_t bidx = 0; bidx < 2 * np; ++bidx) {
                double nb = 0.0;
                for (std::size_t jcol = 0; jcol < block; ++jcol) {
                    nb += nxt[bidx * block + jcol] * nxt[bidx * block + jcol];
                }
                nb = std::sqrt(nb);
                const double scale = nb > tau ? 1.0 - tau / nb : 0.0;
                for (std::size_t jcol = 0; jcol < block; ++jcol) {
                    nxt[bidx * block + jcol] *= scale;
                }
            }
            for (std::size_t i = 0; i < nvar; ++i) {
                xibar[i] = 2.0 * nxt[i] - xi[i];
                xi[i] = nxt[i];
            }
            if (it % 200 == 0) {
                const std::vector<double> kx_now = matvec(k_mat, xi);
                double eq_res = 0.0;
                for (std::size_t r = 0; r < eq_rows; ++r) {
                    eq_res = std::max(eq_res, std::abs(kx_now[r] - target[r]));
                }
                double cone_res = 0.0;
                for (std::size_t r = eq_rows; r < kx_now.size(); ++r) {
                    cone_res = std::max(cone_res, -kx_now[r]);
                }
                if (eq_res <= 0.3 * tol * target_scale && cone_res <= 0.3 * tol) {
                    converged = true;
                }
            }
        }
        if (!converged) {
            // The iterate is still usable if it sits close enough to the
            // matching constraint for the polish below to finish the job.
            const std::vector<double> kx_now = matvec(k_mat, xi);
            double eq_res = 0.0;
            for (std::size_t r = 0; r < eq_rows; ++r) {
                eq_res = std::max(eq_res, std::abs(kx_now[r] - target[r]));
            }
            if (eq_res > 1e-3 * target_scale) {
                fail(ErrorKind::RecoveryFailed,
                     "cone program did not reach tolerance on column " + std::to_string(col));
            }
        }

        // Atom cleanup: snap each block exactly into its cone, then prune.
        double max_block = 0.0;
        for (std::size_t bidx = 0; bidx < 2 * np; ++bidx) {
            double nb = 0.0;
            for (std::size_t jcol = 0; jcol < block; ++jcol) {
                nb += xi[bidx * block + jcol] * xi[bidx * block + jcol];
            }
            max_block = std::max(max_block, std::sqrt(nb));
        }
        const double prune = std::max(1e-8 * max_block, 1e-12);
        struct PendingAtom {
            std::size_t pattern;
            int side;
            std::vector<double> h;
        };
        std::vector<PendingAtom> atoms;
        std::vector<std::vector<std::vector<double>>> normals_by_pattern(np);
        for (std::size_t p = 0; p < np; ++p) {
            const auto& bits = arrangements.patterns[p].pattern;
            auto& normals = normals_by_pattern[p];
            for (std::size_t r = 0; r < n; ++r) {
                std::vector<double> c(dr);
                for (std::size_t jcol = 0; jcol < dr; ++jcol) {
                    c[jcol] = (bits[r] ? 1.0 : -1.0) * z(r, jcol);
                }
                normals.push_back(std::move(c));
            }
            for (int side = 0; side < 2; ++side) {
                const std::size_t bidx = (side == 0 ? p : np + p);
                std::vector<double> h(block);
                for (std::size_t jcol = 0; jcol < block; ++jcol) {
                    h[jcol] = xi[bidx * block + jcol];
                }
                if (norm2(h) <= prune) continue;
                h = project_polyhedral_cone(h, normals);
                if (norm2(h) <= prune) continue;
                atoms.push_back(PendingAtom{p, side, std::move(h)});
            }
        }

        // Polish: alternate min-change projection onto the matching
        // constraint with cone snapping, removing the first-order solver's
        // residual without moving the support.
        if (!atoms.empty()) {
            DataMatrix a_mat(n, atoms.size() * dr, 0.0);
            for (std::size_t aidx = 0; aidx < atoms.size(); ++aidx) {
                const auto& bits = arrangements.patterns[atoms[aidx].pattern].pattern;
                const double sign = atoms[aidx].side == 0 ? 1.0 : -1.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (!bits[r]) continue;
                    for (std::size_t jcol = 0; jcol < dr; ++jcol) {
                        a_mat(r, aidx * dr + jcol) = sign * z(r, jcol);
                    }
                }
            }
            for (int round = 0; round < 25; ++round) {
                std::vector<double> residual = target;
                for (std::size_t r = 0; r < n; ++r) {
                    for (std::size_t aidx = 0; aidx < atoms.size(); ++aidx) {
                        for (std::size_t jcol = 0; jcol < dr; ++jcol) {
                            residual[r] -= a_mat(r, aidx * dr + jcol) * atoms[aidx].h[jcol];
                        }
                    }
                }
                double eq_res = 0.0;
                for (double rres : residual) eq_res = std::max(eq_res, std::abs(rres));
                if (eq_res <= 1e-13 * target_scale) break;
                const std::vector<double> delta = least_squares_min_norm(a_mat, residual);
                for (std::size_t aidx = 0; aidx < atoms.size(); ++aidx) {
                    for (std::size_t jcol = 0; jcol < dr; ++jcol) {
                        atoms[aidx].h[jcol] += delta[aidx * dr + jcol];
                    }
                    atoms[aidx].h = project_polyhedral_cone(
                        atoms[aidx].h, normals_by_pattern[atoms[aidx].pattern]);
                }
            }
        }

        for (const PendingAtom& atom : atoms) {
            const double nh = norm2(atom.h);
            if (nh <= prune) continue;
            objective += nh;
            // Balanced neuron: w1 = h/√‖h‖ paired with w2 = ±√‖h‖ e_col.
            const double root = std::sqrt(nh);
            std::vector<double> w1c(dr);
            for (std::size_t jcol = 0; jcol < dr; ++jcol) w1c[jcol] = atom.h[jcol] / root;
            std::vector<double> w2r(d, 0.0);
            w2r[col] = (atom.side == 0 ? 1.0 : -1.0) * root;
            w1_cols.push_back(std::move(w1c));
            w2_rows.push_back(std::move(w2r));
            result.source_pattern.push_back(atom.pattern);
        }
    }

    if (w1_cols.empty()) {
        // Degenerate target: a single silent neuron keeps the shapes honest.
        result.w1 = DataMatrix(dr, 1, 0.0);
        result.w2 = DataMatrix(1, d, 0.0);
        result.source_pattern.assign(1, 0);
    } else {
        result.w1 = DataMatrix(dr, w1_cols.size());
        result.w2 = DataMatrix(w1_cols.size(), d);
        for (std::size_t jneuron = 0; jneuron < w1_cols.size(); ++jneuron) {
            for (std::size_t i = 0; i < dr; ++i) result.w1(i, jneuron) = w1_cols[jneuron][i];
            for (std::size_t jc = 0; jc < d; ++jc) result.w2(jneuron, jc) = w2_rows[jneuron][jc];
        }
    }
    result.objective = objective;

    const DataMatrix out =
        GeneratorModel::two_layer_relu(result.w1, result.w2).evaluate(z);
    double resid = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t jc = 0; jc < d; ++jc) {
            resid = std::max(resid, std::abs(out(r, jc) - g_star(r, jc)));
        }
    }
    if (resid > tol * std::max(1.0, max_abs_entry(g_star))) {
        fail(ErrorKind::RecoveryFailed,
             "reconstructed network misses the target by " + std::to_string(resid));
    }
    return result;
}

}  // namespace cwgan
