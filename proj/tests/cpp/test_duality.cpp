#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "cwgan/duality.hpp"
#include "cwgan/errors.hpp"
#include "cwgan/matrix.hpp"
#include "cwgan/numerics.hpp"
#include "cwgan/rng.hpp"
#include "doctest.h"

using namespace cwgan;

namespace {

// Dense (direction × radius) grid probe of the polynomial mismatch over the
// unit ball in two dimensions; independent of the production evaluator.
double poly_grid_oracle(const DataMatrix& x, const DataMatrix& g, const Activation& act) {
    double best = 0.0;
    const int dirs = 2000;
    const int radii = 100;
    for (int a = 0; a < dirs; ++a) {
        const double theta = 2.0 * M_PI * a / dirs;
        for (int r = 0; r <= radii; ++r) {
            const double t = static_cast<double>(r) / radii;
            const double ux = t * std::cos(theta);
            const double uy = t * std::sin(theta);
            double value = 0.0;
            for (std::size_t i = 0; i < x.rows(); ++i) {
                value += act.apply(x(i, 0) * ux + x(i, 1) * uy);
            }
            for (std::size_t k = 0; k < g.rows(); ++k) {
                value -= act.apply(g(k, 0) * ux + g(k, 1) * uy);
            }
            best = std::max(best, std::abs(value));
        }
    }
    return best;
}

}  // namespace

TEST_CASE("first-moment gap with maximizing direction") {
    const DataMatrix x{{2.0, 0.0}, {0.0, 1.0}};
    const DataMatrix g{{1.0, 1.0}, {0.0, 0.0}};
    std::vector<double> w;
    const double gap = dual_gap_linear(x, g, &w);
    CHECK(gap == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == doctest::Approx(0.0));

    CHECK(dual_gap_linear(x, x) == doctest::Approx(0.0));
}

TEST_CASE("second-moment gap equals spectral mismatch") {
    const DataMatrix x{{2.0, 0.0}, {0.0, 1.0}};
    const DataMatrix zero(2, 2, 0.0);
    CHECK(dual_gap_quadratic(x, zero) == doctest::Approx(4.0).epsilon(1e-10));

    // Shrinking the dominant direction to sqrt(3) leaves a residual of exactly
    // one in both axes.
    const DataMatrix g{{std::sqrt(3.0), 0.0}, {0.0, 0.0}};
    std::vector<double> w;
    const double gap = dual_gap_quadratic(x, g, &w);
    CHECK(gap == doctest::Approx(1.0).epsilon(1e-10));
    const DataMatrix diff = gram(x) - gram(g);
    const std::vector<double> dw = matvec(diff, w);
    CHECK(std::abs(dot(w, dw)) == doctest::Approx(gap).epsilon(1e-8));
    CHECK(norm2(w) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("one-dimensional relu gap with threshold is exact") {
    const DataMatrix x{{-1.0}, {1.0}};
    const DataMatrix g{{-0.9}, {0.9}};
    std::vector<double> w;
    double bias = 0.0;
    const double gap = dual_gap_relu(x, g, 100, 0, &w, &bias);
    CHECK(gap == doctest::Approx(0.1).epsilon(1e-10));
    // The witness must attain the reported value.
    double attained = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        attained += std::max(0.0, x(i, 0) * w[0] + bias);
        attained -= std::max(0.0, g(i, 0) * w[0] + bias);
    }
    CHECK(std::abs(attained) == doctest::Approx(gap).epsilon(1e-12));

    // Identical sets have zero gap no matter the threshold.
    CHECK(dual_gap_relu(x, x) == doctest::Approx(0.0));
}

TEST_CASE("relu gap dominates its bias-free sampled probe") {
    const DataMatrix x{{-1.0}, {1.0}};
    const DataMatrix g{{-0.9}, {0.9}};
    const double exact = dual_gap_relu(x, g);
    const double sampled = dual_gap_sampled(x, g, Activation::relu(), 2000);
    CHECK(sampled <= exact + 1e-12);
    CHECK(sampled == doctest::Approx(0.1).epsilon(1e-12));  // ±1 both attain it
}

TEST_CASE("planar relu sweep matches dense direction sampling") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const CounterRng rng(seed, 1234);
        const DataMatrix x = rng.split(0).gaussian_matrix(4, 2);
        const DataMatrix g = rng.split(1).gaussian_matrix(3, 2);
        std::vector<double> w;
        const double exact = dual_gap_relu(x, g, 0, 0, &w);
        const double sampled = dual_gap_sampled(x, g, Activation::relu(), 50000, seed);
        CAPTURE(seed);
        CHECK(sampled <= exact + 1e-9);
        CHECK(sampled >= exact - 0.01 * (1.0 + exact));
        CHECK(norm2(w) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("three-dimensional relu gap falls back to seeded sampling") {
    const CounterRng rng(3, 55);
    const DataMatrix x = rng.split(0).gaussian_matrix(4, 3);
    const DataMatrix g = rng.split(1).gaussian_matrix(4, 3);
    const double a = dual_gap_relu(x, g, 5000, 7);
    const double b = dual_gap_relu(x, g, 5000, 7);
    CHECK(a == b);
    CHECK(a == dual_gap_sampled(x, g, Activation::relu(), 5000, 7));
}

TEST_CASE("polynomial gap specializes to the closed forms") {
    const CounterRng rng(11, 88);
    const DataMatrix x = rng.split(0).gaussian_matrix(3, 2);
    const DataMatrix g = rng.split(1).gaussian_matrix(2, 2);

    CHECK(dual_gap_polynomial(x, g, Activation::polynomial(1, 0, 0)) ==
          doctest::Approx(dual_gap_quadratic(x, g)).epsilon(1e-9));
    CHECK(dual_gap_polynomial(x, g, Activation::polynomial(0, 1, 0)) ==
          doctest::Approx(dual_gap_linear(x, g)).epsilon(1e-12));
    // Pure constant: only the sample-count imbalance survives.
    CHECK(dual_gap_polynomial(x, g, Activation::polynomial(0, 0, 2)) ==
          doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("polynomial gap agrees with a dense grid probe") {
    const CounterRng rng(21, 88);
    const DataMatrix x = rng.split(0).gaussian_matrix(3, 2);
    const DataMatrix g = rng.split(1).gaussian_matrix(2, 2);
    for (const Activation& act :
         {Activation::polynomial(1.0, 1.0, 0.0), Activation::polynomial(1.0, 0.0, 5.0),
          Activation::polynomial(0.0, 1.0, 3.0), Activation::polynomial(-2.0, 0.5, 1.0)}) {
        const double impl = dual_gap_polynomial(x, g, act, 20000, 0);
        const double grid = poly_grid_oracle(x, g, act);
        CAPTURE(act.a);
        CAPTURE(act.b);
        CHECK(std::abs(impl - grid) <= 0.02 * (1.0 + grid));
    }
}

TEST_CASE("feasibility report margins and modes") {
    const DataMatrix x{{2.0, 0.0}, {0.0, 1.0}};
    const DataMatrix zero(2, 2, 0.0);

    DualConstraint c;
    c.activation = Activation::quadratic();
    c.beta_d = 2.0;
    FeasibilityReport r = check_feasible(x, zero, c);
    CHECK(r.gap_value == doctest::Approx(4.0).epsilon(1e-10));
    CHECK_FALSE(r.feasible);
    CHECK(r.margin == doctest::Approx(-2.0).epsilon(1e-9));

    c.beta_d = 5.0;
    r = check_feasible(x, zero, c);
    CHECK(r.feasible);
    CHECK(r.margin == doctest::Approx(1.0).epsilon(1e-9));

    c.mode = ConstraintMode::NormConstrained;
    c.beta_d = 0.0;
    r = check_feasible(x, zero, c);
    CHECK(r.feasible);
    CHECK(r.margin == 0.0);
    CHECK(r.gap_value == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("skip connection adds the first-moment matching requirement") {
    const DataMatrix x{{1.0, 0.0}, {-1.0, 0.0}};
    const DataMatrix g_ok{{0.0, 1.0}, {0.0, -1.0}};
    const DataMatrix g_shifted{{0.5, 0.0}, {0.5, 0.0}};

    DualConstraint c;
    c.activation = Activation::quadratic();
    c.skip_connection = true;
    c.beta_d = 3.0;
    FeasibilityReport r = check_feasible(x, g_ok, c);
    CHECK(r.gap_value == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.feasible);

    r = check_feasible(x, g_shifted, c);
    CHECK_FALSE(r.feasible);
    CHECK(r.margin == doctest::Approx(-1.0).epsilon(1e-10));

    c.activation = Activation::linear();
    CHECK_THROWS_AS(check_feasible(x, g_ok, c), Error);
}

TEST_CASE("input validation for the feasibility oracle") {
    const DataMatrix x(2, 2, 1.0);
    const DataMatrix g(2, 3, 1.0);
    DualConstraint c;
    CHECK_THROWS_AS(check_feasible(x, g, c), Error);

    const DataMatrix g2(2, 2, 0.5);
    c.beta_d = -1.0;
    CHECK_THROWS_AS(check_feasible(x, g2, c), Error);

    c.beta_d = 1.0;
    c.activation = Activation::relu();
    const FeasibilityReport r = check_feasible(x, g2, c);
    CHECK(r.gap_value > 0.0);
    CHECK(r.witness.size() == 2);
}

TEST_CASE("relu feasibility report carries the optimized threshold") {
    const DataMatrix x{{-1.0}, {1.0}};
    const DataMatrix g{{-0.9}, {0.9}};
    DualConstraint c;
    c.activation = Activation::relu();
    c.beta_d = 0.1;
    const FeasibilityReport r = check_feasible(x, g, c);
    CHECK(r.has_witness_bias);
    CHECK(r.gap_value == doctest::Approx(0.1).epsilon(1e-10));
    // Sitting exactly on the boundary: the margin is zero up to rounding, so
    // the boolean verdict is not asserted here.
    CHECK(r.margin == doctest::Approx(0.0).epsilon(1e-10));
}
