#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "cwgan/arrangements.hpp"
#include "cwgan/errors.hpp"
#include "cwgan/generator.hpp"
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

DataMatrix relu_one_neuron(const DataMatrix& z, const std::vector<double>& w) {
    DataMatrix out(z.rows(), 1);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double t = 0.0;
        for (std::size_t j = 0; j < z.cols(); ++j) t += z(i, j) * w[j];
        out(i, 0) = std::max(0.0, t);
    }
    return out;
}

double recovery_residual(const DataMatrix& z, const RecoveryResult& rec,
                         const DataMatrix& target) {
    const DataMatrix out = GeneratorModel::two_layer_relu(rec.w1, rec.w2).evaluate(z);
    return max_abs_entry(out - target);
}

}  // namespace

TEST_CASE("zero target recovers a silent network") {
    const CounterRng rng(71);
    const DataMatrix z = rng.gaussian_matrix(4, 2);
    const ArrangementSet arr = enumerate_arrangements(z, false, 0);
    REQUIRE(arr.complete);
    const DataMatrix target(4, 2, 0.0);
    const RecoveryResult rec = generator_recovery(z, target, arr);
    CHECK(rec.objective == 0.0);
    CHECK(recovery_residual(z, rec, target) == 0.0);
}

TEST_CASE("mixed-sign scalar latents reach an interleaved target") {
    const DataMatrix z{{1.0}, {-1.0}};
    const ArrangementSet arr = enumerate_arrangements(z, false, 0);
    REQUIRE(arr.complete);
    const DataMatrix target{{-0.9}, {0.9}};
    const RecoveryResult rec = generator_recovery(z, target, arr, 1e-6);
    CHECK(recovery_residual(z, rec, target) <= 1e-6);
    // Two rays are needed: one per output sign.
    CHECK(rec.objective == doctest::Approx(1.8).epsilon(1e-4));
    for (std::size_t j = 0; j < rec.w1.cols(); ++j) {
        CHECK(cone_membership(rec.w1.col(j), arr.patterns[rec.source_pattern[j]], z));
    }
}

TEST_CASE("planted single neurons are reproduced at no extra cost") {
    for (int trial = 0; trial < 10; ++trial) {
        CAPTURE(trial);
        const CounterRng rng(100 + trial);
        const DataMatrix z = rng.gaussian_matrix(5, 2);
        std::vector<double> w = {rng.gaussian(40), rng.gaussian(41)};
        DataMatrix zw = relu_one_neuron(z, w);
        if (max_abs_entry(zw) == 0.0) {
            for (double& t : w) t = -t;
            zw = relu_one_neuron(z, w);
        }
        REQUIRE(max_abs_entry(zw) > 0.0);
        const ArrangementSet arr = enumerate_arrangements(z, false, 0);
        REQUIRE(arr.complete);

        const RecoveryResult rec = generator_recovery(z, zw, arr, 1e-6);
        CHECK(recovery_residual(z, rec, zw) <= 1e-6 * std::max(1.0, max_abs_entry(zw)));
        // The planted neuron itself is feasible, so the minimum can't exceed it.
        CHECK(rec.objective <= norm2(w) + 1e-4);
        for (std::size_t j = 0; j < rec.w1.cols(); ++j) {
            CHECK(cone_membership(rec.w1.col(j), arr.patterns[rec.source_pattern[j]], z));
        }
    }
}

TEST_CASE("recovered neurons come out balanced and rescaling preserves output") {
    const CounterRng rng(81);
    const DataMatrix z = rng.gaussian_matrix(5, 2);
    std::vector<double> w = {1.3, -0.4};
    const DataMatrix zw = relu_one_neuron(z, w);
    const ArrangementSet arr = enumerate_arrangements(z, false, 0);
    const RecoveryResult rec = generator_recovery(z, zw, arr, 1e-6);

    double balanced_cost = 0.0;
    for (std::size_t j = 0; j < rec.w1.cols(); ++j) {
        double in2 = 0.0;
        for (std::size_t i = 0; i < rec.w1.rows(); ++i) in2 += rec.w1(i, j) * rec.w1(i, j);
        double out2 = 0.0;
        for (std::size_t c = 0; c < rec.w2.cols(); ++c) out2 += rec.w2(j, c) * rec.w2(j, c);
        // Balance: incoming and outgoing squared norms agree per neuron.
        CHECK(in2 == doctest::Approx(out2).epsilon(1e-10));
        balanced_cost += in2 + out2;
    }
    CHECK(balanced_cost == doctest::Approx(2.0 * rec.objective).epsilon(1e-8));

    // Per-neuron rescaling leaves the function unchanged but raises the cost.
    DataMatrix w1s = rec.w1;
    DataMatrix w2s = rec.w2;
    const double alpha = 2.0;
    for (std::size_t j = 0; j < w1s.cols(); ++j) {
        for (std::size_t i = 0; i < w1s.rows(); ++i) w1s(i, j) *= alpha;
        for (std::size_t c = 0; c < w2s.cols(); ++c) w2s(j, c) /= alpha;
    }
    const DataMatrix out_bal = GeneratorModel::two_layer_relu(rec.w1, rec.w2).evaluate(z);
    const DataMatrix out_scaled = GeneratorModel::two_layer_relu(w1s, w2s).evaluate(z);
    CHECK(max_abs_entry(out_bal - out_scaled) < 1e-10);
    double scaled_cost = 0.0;
    for (std::size_t j = 0; j < w1s.cols(); ++j) {
        for (std::size_t i = 0; i < w1s.rows(); ++i) scaled_cost += w1s(i, j) * w1s(i, j);
        for (std::size_t c = 0; c < w2s.cols(); ++c) scaled_cost += w2s(j, c) * w2s(j, c);
    }
    CHECK(scaled_cost >= balanced_cost - 1e-12);
}

TEST_CASE("multi-column targets are matched column by column") {
    const CounterRng rng(91);
    const DataMatrix z = rng.gaussian_matrix(5, 2);
    const std::vector<double> wa = {0.9, 0.3};
    const std::vector<double> wb = {-0.5, 1.1};
    const DataMatrix ca = relu_one_neuron(z, wa);
    const DataMatrix cb = relu_one_neuron(z, wb);
    DataMatrix target(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
        target(i, 0) = ca(i, 0);
        target(i, 1) = cb(i, 0);
    }
    const ArrangementSet arr = enumerate_arrangements(z, false, 0);
    const RecoveryResult rec = generator_recovery(z, target, arr, 1e-6);
    CHECK(recovery_residual(z, rec, target) <= 1e-6 * std::max(1.0, max_abs_entry(target)));
    CHECK(rec.objective <= norm2(wa) + norm2(wb) + 1e-4);
}

TEST_CASE("unreachable targets and incomplete enumerations are reported") {
    const DataMatrix z{{1.0}, {2.0}};  // single-signed latents span only one ray
    const ArrangementSet arr = enumerate_arrangements(z, false, 0);
    REQUIRE(arr.complete);
    const DataMatrix target{{1.0}, {0.0}};  // not proportional to (1, 2)
    CHECK(thrown_kind([&] { generator_recovery(z, target, arr, 1e-6); }) ==
          ErrorKind::RecoveryFailed);

    ArrangementSet partial = arr;
    partial.complete = false;
    CHECK(thrown_kind([&] { generator_recovery(z, target, partial); }) ==
          ErrorKind::IncompleteArrangements);

    const DataMatrix short_target{{1.0}};
    CHECK(thrown_kind([&] { generator_recovery(z, short_target, arr); }) ==
          ErrorKind::DimensionMismatch);
}
