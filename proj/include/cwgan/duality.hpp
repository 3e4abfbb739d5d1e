#pragma once

#include <cstdint>
#include <vector>

#include "cwgan/activation.hpp"
#include "cwgan/matrix.hpp"

namespace cwgan {

// How the discriminator budget enters the problem: as a hard dual constraint
// (‖·‖ ≤ beta_d, the regularized formulation) or folded into the objective
// (norm-constrained formulation, where the same norm is the value to report).
enum class ConstraintMode { Regularized, NormConstrained };

struct DualConstraint {
    Activation activation = Activation::linear();
    double beta_d = 1.0;
    ConstraintMode mode = ConstraintMode::Regularized;
    // Quadratic activation with an identity skip path additionally forces the
    // first moments to match: 1^T X = 1^T G.
    bool skip_connection = false;
};

struct FeasibilityReport {
    double gap_value = 0.0;  // the discriminator-side norm for this activation
    bool feasible = false;
    double margin = 0.0;  // feasible ⇔ margin ≥ 0
    std::vector<double> witness;  // direction attaining (or best found for) the gap
    double witness_bias = 0.0;    // only set when the evaluator optimized a bias
    bool has_witness_bias = false;
};

// ‖1^T X − 1^T G‖_2 (linear activation). Optional out-parameter receives the
// maximizing unit direction.
double dual_gap_linear(const DataMatrix& x, const DataMatrix& g,
                       std::vector<double>* witness = nullptr);

// ‖X^T X − G^T G‖_2, the spectral norm of the second-moment mismatch
// (quadratic activation). Witness = eigenvector of the extreme eigenvalue.
double dual_gap_quadratic(const DataMatrix& x, const DataMatrix& g,
                          std::vector<double>* witness = nullptr);

// max_u |1^T (X u)_+ − 1^T (G u)_+|.
//   - 1 column, equal row counts: exact, with the discriminator bias optimized
//     jointly (breakpoint scan; the maximum over thresholds sits at a data
//     value or in the all-active regime).
//   - ≤ 2 columns otherwise: exact over unit directions (angular sweep,
//     bias-free).
//   - ≥ 3 columns: maximum over `samples` seeded sphere directions
//     (bias-free), a deterministic lower bound on the true gap.
double dual_gap_relu(const DataMatrix& x, const DataMatrix& g, std::size_t samples = 20000,
                     std::uint64_t seed = 0, std::vector<double>* witness = nullptr,
                     double* witness_bias = nullptr);

// Monte-Carlo probe of the gap for any activation: max over `samples` sphere
// directions of |1^T σ(X u) − 1^T σ(G u)|. Always a lower bound on the exact
// sup (used to certify that shipped generators respect the budget).
double dual_gap_sampled(const DataMatrix& x, const DataMatrix& g, const Activation& activation,
                        std::size_t samples, std::uint64_t seed = 0,
                        std::vector<double>* witness = nullptr);

// Gap for σ(t) = a t² + b t + c over the unit ball. Exact when a·b = 0; for
// mixed polynomials each sampled direction is refined exactly along its ray.
double dual_gap_polynomial(const DataMatrix& x, const DataMatrix& g, const Activation& activation,
                           std::size_t samples = 20000, std::uint64_t seed = 0,
                           std::vector<double>* witness = nullptr);

// Evaluate the dual constraint for (x, g) under `constraint`.
//  - Regularized mode: margin = beta_d − gap, feasible ⇔ margin ≥ 0. With
//    skip_connection, a first-moment mismatch beyond 1e-8·(1 + ‖1^T X‖) makes
//    the report infeasible (margin = −mismatch).
//  - NormConstrained mode: gap_value is the objective norm itself,
//    feasible = true with margin = 0 (a failed skip-mode mean check still
//    reports infeasible).
FeasibilityReport check_feasible(const DataMatrix& x, const DataMatrix& g,
                                 const DualConstraint& constraint, std::size_t samples = 20000,
                                 std::uint64_t seed = 0);

}  // namespace cwgan
