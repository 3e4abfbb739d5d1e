#include "cwgan/duality.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cwgan/errors.hpp"
#include "cwgan/numerics.hpp"
#include "cwgan/rng.hpp"

namespace cwgan {

namespace {

constexpr double kHalfPi = 1.5707963267948966;
constexpr double kTwoPi = 6.283185307179586476925286766559;

std::vector<double> column_sum_diff(const DataMatrix& x, const DataMatrix& g) {
    std::vector<double> m = column_sums(x);
    const std::vector<double> mg = column_sums(g);
    for (std::size_t j = 0; j < m.size(); ++j) m[j] -= mg[j];
    return m;
}

void require_matching_columns(const DataMatrix& x, const DataMatrix& g, const char* where) {
    if (x.cols() != g.cols()) fail(ErrorKind::DimensionMismatch, where);
    require_finite(x, where);
    require_finite(g, where);
}

// Signed sum of ReLU responses: Σ_i (x_i·u + b)_+ − Σ_k (g_k·u + b)_+.
double relu_mismatch(const DataMatrix& x, const DataMatrix& g, const std::vector<double>& u,
                     double bias) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double s = bias;
        for (std::size_t j = 0; j < x.cols(); ++j) s += x(i, j) * u[j];
        if (s > 0.0) total += s;
    }
    for (std::size_t k = 0; k < g.rows(); ++k) {
        double s = bias;
        for (std::size_t j = 0; j < g.cols(); ++j) s += g(k, j) * u[j];
        if (s > 0.0) total -= s;
    }
    return total;
}

struct ReluBest {
    double value = 0.0;
    std::vector<double> u;
    double bias = 0.0;
    bool has_bias = false;
};

void consider(ReluBest& best, double value, const std::vector<double>& u, double bias,
              bool has_bias) {
    if (std::abs(value) > best.value) {
        best.value = std::abs(value);
        best.u = u;
        best.bias = bias;
        best.has_bias = has_bias;
    }
}

// Exact 1-D gap with the discriminator threshold optimized jointly. For fixed
// u ∈ {±1} the mismatch is piecewise linear in the threshold with breakpoints
// at the data values, and with equal sample counts it is constant once every
// unit is active, so scanning breakpoints plus one all-active point is exact.
ReluBest relu_gap_1d_biased(const DataMatrix& x, const DataMatrix& g) {
    ReluBest best;
    best.has_bias = true;
    best.u = {1.0};
    for (double u : {1.0, -1.0}) {
        std::vector<double> breakpoints;
        breakpoints.reserve(x.rows() + g.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) breakpoints.push_back(-u * x(i, 0));
        for (std::size_t k = 0; k < g.rows(); ++k) breakpoints.push_back(-u * g(k, 0));
        std::sort(breakpoints.begin(), breakpoints.end());
        breakpoints.push_back(breakpoints.back() + 1.0);  // all units active
        const std::vector<double> dir = {u};
        for (double b : breakpoints) {
            consider(best, relu_mismatch(x, g, dir, b), dir, b, true);
        }
    }
    if (best.u.empty()) best.u = {1.0};
    return best;
}

// Exact bias-free gap for data with at most two columns: the activation
// pattern of both sample sets is constant on each angular sector, where the
// mismatch is linear in u, so its arc maximum sits at a sector endpoint or at
// the sector's own gradient direction. All candidates are evaluated literally.
ReluBest relu_gap_sweep(const DataMatrix& x, const DataMatrix& g) {
    const std::size_t d = x.cols();
    auto point = [&](const DataMatrix& m, std::size_t i) {
        return std::pair<double, double>(m(i, 0), d == 2 ? m(i, 1) : 0.0);
    };

    std::vector<double> bounds;
    auto add_bounds = [&](const DataMatrix& m) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            auto [px, py] = point(m, i);
            if (px == 0.0 && py == 0.0) continue;
            const double base = std::atan2(py, px);
            for (double shift : {kHalfPi, -kHalfPi}) {
                double a = std::fmod(base + shift, kTwoPi);
                if (a < 0.0) a += kTwoPi;
                bounds.push_back(a);
            }
        }
    };
    add_bounds(x);
    add_bounds(g);

    ReluBest best;
    best.u.assign(d, 0.0);
    best.u[0] = 1.0;
    if (bounds.empty()) return best;  // all rows zero: mismatch ≡ 0

    std::sort(bounds.begin(), bounds.end());
    std::vector<double> uniq;
    for (double a : bounds) {
        if (uniq.empty() || a - uniq.back() > 1e-12) uniq.push_back(a);
    }
    if (uniq.size() > 1 && (uniq.front() + kTwoPi) - uniq.back() <= 1e-12) uniq.pop_back();

    std::vector<double> candidates = uniq;
    for (std::size_t i = 0; i < uniq.size(); ++i) {
        const double lo = uniq[i];
        const double hi = (i + 1 < uniq.size()) ? uniq[i + 1] : uniq.front() + kTwoPi;
        const double mid = 0.5 * (lo + hi);
        candidates.push_back(mid);
        // Gradient of the mismatch on this sector: sum of active rows of X
        // minus sum of active rows of G.
        const double vx = std::cos(mid);
        const double vy = std::sin(mid);
        double cx = 0.0;
        double cy = 0.0;
        auto accumulate = [&](const DataMatrix& m, double sign) {
            for (std::size_t r = 0; r < m.rows(); ++r) {
                auto [px, py] = point(m, r);
                if (px * vx + py * vy > 0.0) {
                    cx += sign * px;
                    cy += sign * py;
                }
            }
        };
        accumulate(x, 1.0);
        accumulate(g, -1.0);
        if (cx != 0.0 || cy != 0.0) {
            candidates.push_back(std::atan2(cy, cx));
            candidates.push_back(std::atan2(-cy, -cx));
        }
    }

    for (double theta : candidates) {
        std::vector<double> u(d, 0.0);
        u[0] = std::cos(theta);
        if (d == 2) u[1] = std::sin(theta);
        consider(best, relu_mismatch(x, g, u, 0.0), u, 0.0, false);
    }
    // In one dimension the sweep parameterizes u = cos θ with |u| ≤ 1; rescale
    // the winning direction to the unit sphere (the mismatch is positively
    // homogeneous, and θ ∈ {0, π} is always among the candidates).
    if (d == 1 && std::abs(best.u[0]) > 0.0) best.u[0] = best.u[0] > 0.0 ? 1.0 : -1.0;
    return best;
}

std::uint64_t activation_stream(const Activation& activation) {
    switch (activation.tag) {
        case Activation::Tag::Linear: return 0x6C696E;
        case Activation::Tag::Quadratic: return 0x717561;
        case Activation::Tag::ReLU: return 0x72656C75;
        case Activation::Tag::Polynomial: return 0x706F6C79;
    }
    return 0;
}

}  // namespace

double dual_gap_linear(const DataMatrix& x, const DataMatrix& g, std::vector<double>* witness) {
    require_matching_columns(x, g, "linear dual gap");
    const std::vector<double> m = column_sum_diff(x, g);
    const double gap = norm2(m);
    if (witness != nullptr) {
        witness->assign(m.size(), 0.0);
        if (gap > 0.0) {
            for (std::size_t j = 0; j < m.size(); ++j) (*witness)[j] = m[j] / gap;
        } else {
            (*witness)[0] = 1.0;
        }
    }
    return gap;
}

double dual_gap_quadratic(const DataMatrix& x, const DataMatrix& g, std::vector<double>* witness) {
    require_matching_columns(x, g, "quadratic dual gap");
    const DataMatrix diff = gram(x) - gram(g);
    const double gap = spectral_norm(diff);
    if (witness != nullptr) {
        const EigResult eig = sym_eig(diff);
        const std::size_t last = eig.eigenvalues.size() - 1;
        const std::size_t idx =
            std::abs(eig.eigenvalues.front()) >= std::abs(eig.eigenvalues[last]) ? 0 : last;
        *witness = eig.eigenvectors.col(idx);
    }
    return gap;
}

double dual_gap_relu(const DataMatrix& x, const DataMatrix& g, std::size_t samples,
                     std::uint64_t seed, std::vector<double>* witness, double* witness_bias) {
    require_matching_columns(x, g, "relu dual gap");
    const std::size_t d = x.cols();
    ReluBest best;
    if (d == 1 && x.rows() == g.rows()) {
        best = relu_gap_1d_biased(x, g);
    } else if (d <= 2) {
        best = relu_gap_sweep(x, g);
    } else {
        std::vector<double> sampled_witness;
        best.value = dual_gap_sampled(x, g, Activation::relu(), samples, seed, &sampled_witness);
        best.u = std::move(sampled_witness);
    }
    if (witness != nullptr) *witness = best.u;
    if (witness_bias != nullptr) *witness_bias = best.has_bias ? best.bias : 0.0;
    return best.value;
}

double dual_gap_sampled(const DataMatrix& x, const DataMatrix& g, const Activation& activation,
                        std::size_t samples, std::uint64_t seed, std::vector<double>* witness) {
    require_matching_columns(x, g, "sampled dual gap");
    if (samples == 0) fail(ErrorKind::InvalidInput, "sample count must be positive");
    const std::size_t d = x.cols();
    const CounterRng rng(seed, activation_stream(activation));
    double best = -1.0;
    std::vector<double> best_u(d, 0.0);
    for (std::size_t s = 0; s < samples; ++s) {
        const std::vector<double> u = rng.sphere_direction(s, d);
        double value = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double t = 0.0;
            for (std::size_t j = 0; j < d; ++j) t += x(i, j) * u[j];
            value += activation.apply(t);
        }
        for (std::size_t k = 0; k < g.rows(); ++k) {
            double t = 0.0;
            for (std::size_t j = 0; j < d; ++j) t += g(k, j) * u[j];
            value -= activation.apply(t);
        }
        if (std::abs(value) > best) {
            best = std::abs(value);
            best_u = u;
        }
    }
    if (witness != nullptr) *witness = best_u;
    return best;
}

double dual_gap_polynomial(const DataMatrix& x, const DataMatrix& g, const Activation& activation,
                           std::size_t samples, std::uint64_t seed, std::vector<double>* witness) {
    require_matching_columns(x, g, "polynomial dual gap");
    if (activation.tag == Activation::Tag::ReLU) {
        fail(ErrorKind::InvalidInput, "polynomial gap requires polynomial coefficients");
    }
    const double a = activation.a;
    const double b = activation.b;
    const double c = activation.c;
    const std::size_t d = x.cols();
    const double count_shift =
        c * (static_cast<double>(x.rows()) - static_cast<double>(g.rows()));

    if (a == 0.0) {
        // |b·m^T u + const| over the unit ball peaks along ±m.
        const std::vector<double> m = column_sum_diff(x, g);
        const double mn = norm2(m);
        double sign = count_shift >= 0.0 ? 1.0 : -1.0;
        if (witness != nullptr) {
            witness->assign(d, 0.0);
            if (b != 0.0 && mn > 0.0) {
                const double dir = sign * (b >= 0.0 ? 1.0 : -1.0);
                for (std::size_t j = 0; j < d; ++j) (*witness)[j] = dir * m[j] / mn;
            } else {
                (*witness)[0] = 1.0;
            }
        }
        return std::abs(b) * mn + std::abs(count_shift);
    }
    if (b == 0.0) {
        // a·u^T D u + const with u^T D u ranging over [min(λ_min,0), max(λ_max,0)].
        const DataMatrix diff = gram(x) - gram(g);
        const EigResult eig = sym_eig(diff);
        const double hi = std::max(eig.eigenvalues.front(), 0.0);
        const double lo = std::min(eig.eigenvalues.back(), 0.0);
        const double at_hi = std::abs(a * hi + count_shift);
        const double at_lo = std::abs(a * lo + count_shift);
        if (witness != nullptr) {
            witness->assign(d, 0.0);
            const bool use_hi = at_hi >= at_lo;
            const double lambda = use_hi ? hi : lo;
            if (lambda != 0.0) {
                *witness = eig.eigenvectors.col(use_hi ? 0 : eig.eigenvalues.size() - 1);
            }
        }
        return std::max(at_hi, at_lo);
    }

    // Mixed quadratic-plus-linear response: sample directions, then maximize
    // exactly along each ray u(t) = t·u for t ∈ [0, 1].
    if (samples == 0) fail(ErrorKind::InvalidInput, "sample count must be positive");
    const DataMatrix diff = gram(x) - gram(g);
    const std::vector<double> m = column_sum_diff(x, g);
    const CounterRng rng(seed, activation_stream(activation));
    double best = std::abs(count_shift);  // t = 0
    std::vector<double> best_u(d, 0.0);
    for (std::size_t s = 0; s < samples; ++s) {
        const std::vector<double> u = rng.sphere_direction(s, d);
        const std::vector<double> du = matvec(diff, u);
        const double quad = a * dot(u, du);
        const double lin = b * dot(m, u);
        std::vector<double> ts = {1.0};
        if (quad != 0.0) {
            const double t_star = -lin / (2.0 * quad);
            if (t_star > 0.0 && t_star < 1.0) ts.push_back(t_star);
        }
        for (double t : ts) {
            const double value = std::abs(quad * t * t + lin * t + count_shift);
            if (value > best) {
                best = value;
                best_u = u;
                for (double& e : best_u) e *= t;
            }
        }
    }
    if (witness != nullptr) *witness = best_u;
    return best;
}

FeasibilityReport check_feasible(const DataMatrix& x, const DataMatrix& g,
                                 const DualConstraint& constraint, std::size_t samples,
                                 std::uint64_t seed) {
    require_matching_columns(x, g, "feasibility check");
    if (constraint.beta_d < 0.0) fail(ErrorKind::InvalidInput, "beta_d must be nonnegative");
    if (constraint.skip_connection &&
        constraint.activation.tag != Activation::Tag::Quadratic) {
        fail(ErrorKind::InvalidInput, "skip connection requires quadratic activation");
    }

    FeasibilityReport report;
    switch (constraint.activation.tag) {
        case Activation::Tag::Linear:
            report.gap_value = dual_gap_linear(x, g, &report.witness);
            break;
        case Activation::Tag::Quadratic:
            report.gap_value = dual_gap_quadratic(x, g, &report.witness);
            break;
        case Activation::Tag::ReLU: {
            double bias = 0.0;
            report.gap_value = dual_gap_relu(x, g, samples, seed, &report.witness, &bias);
            if (x.cols() == 1 && x.rows() == g.rows()) {
                report.witness_bias = bias;
                report.has_witness_bias = true;
            }
            break;
        }
        case Activation::Tag::Polynomial:
            report.gap_value =
                dual_gap_polynomial(x, g, constraint.activation, samples, seed, &report.witness);
            break;
    }

    if (constraint.mode == ConstraintMode::NormConstrained) {
        report.margin = 0.0;
        report.feasible = true;
    } else {
        report.margin = constraint.beta_d - report.gap_value;
        report.feasible = report.margin >= 0.0;
    }

    if (constraint.skip_connection) {
        const double mismatch = norm2(column_sum_diff(x, g));
        const double tol = 1e-8 * (1.0 + norm2(column_sums(x)));
        if (mismatch > tol) {
            report.margin = -mismatch;
            report.feasible = false;
        }
    }
    return report;
}

}  // namespace cwgan
