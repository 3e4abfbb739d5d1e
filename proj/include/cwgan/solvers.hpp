#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cwgan/arrangements.hpp"
#include "cwgan/matrix.hpp"

namespace cwgan {

// Choice of the orthonormal factor L in the thresholded-spectrum generator
// G* = L(Σ² − β_d I)_+^{1/2} V^T. Any L with orthonormal columns yields the
// same second moments; pinning it keeps multi-stage pipelines reproducible.
struct OrthogonalChoice {
    enum class Kind { Identity, UAligned, Given };
    Kind kind = Kind::Identity;
    DataMatrix q;  // used by Given: orthonormal columns, one per kept mode

    static OrthogonalChoice identity() { return {}; }
    static OrthogonalChoice u_aligned() { return {Kind::UAligned, {}}; }
    static OrthogonalChoice given(DataMatrix q_in) { return {Kind::Given, std::move(q_in)}; }
};

// Convex penalty on a weight vector. `weight` scales the base value; the
// minimizers of the constrained programs are invariant to positive scaling.
struct Regularizer {
    enum class Kind { SquaredFrobenius, LpToTheP, Custom };
    Kind kind = Kind::SquaredFrobenius;
    double weight = 1.0;
    double p = 2.0;  // LpToTheP exponent, ≥ 1
    std::function<double(const std::vector<double>&)> value_fn;
    std::function<std::vector<double>(const std::vector<double>&)> subgrad_fn;

    static Regularizer squared_frobenius(double weight = 1.0);
    static Regularizer lp_to_the_p(double p, double weight = 1.0);
    static Regularizer custom(std::function<double(const std::vector<double>&)> value,
                              std::function<std::vector<double>(const std::vector<double>&)> grad,
                              double weight = 1.0);

    double value(const std::vector<double>& w) const;
    std::vector<double> subgradient(const std::vector<double>& w) const;
};

// System of two-sided affine constraints |a_j^T w + b_j| ≤ bound.
struct AbsConstraintSystem {
    struct Row {
        std::vector<double> a;
        double b = 0.0;
    };
    std::vector<Row> rows;
    double bound = 0.0;
    std::size_t dim = 0;
    // Set when the bound exceeds the smallest gap between adjacent data points
    // of the originating 1-D problem (the derivation's ordering assumption may
    // then fail; the program itself can still be solved).
    bool beta_warning = false;

    double violation(const std::vector<double>& w) const;  // max over rows, 0 if feasible
};

// Thresholded-spectrum generator (quadratic discriminator closed form):
// G* = L(Σ² − β_d I)_+^{1/2}V^T for X = UΣV^T. Guarantees
// ‖X^TX − G*^TG*‖₂ = min(β_d, σ_max²) and ‖G*‖_F² = Σ_k(σ_k² − β_d)_+.
DataMatrix svt_generator(const DataMatrix& x, double beta_d,
                         const OrthogonalChoice& orient = OrthogonalChoice::identity());

// Optimal linear generator weights through a fixed latent matrix: with
// Z^TZ = QΛQ^T and k = max{k : σ_k(X)² ≥ β_d},
//   W* = pinv_sqrt(Z^TZ, k) · Q_k (Σ_k² − β_d)_+^{1/2} V_k^T,
// so that (ZW*)^T(ZW*) = V(Σ² − β_d I)_+V^T exactly. Requires rank(Z) ≥ k.
DataMatrix closed_form_linear_weights(const DataMatrix& z, const DataMatrix& x, double beta_d);

// Number of modes the closed form keeps: |{i : σ_i(X)² ≥ β_d}|.
std::size_t thresholded_rank(const DataMatrix& x, double beta_d);

// Same closed form with an orthonormal k×k mixer inserted between the
// whitening and shrinkage factors: W = pinv_sqrt(Z^TZ, k)·Q_k·L·D^{1/2}V_k^T.
// Any orthonormal L preserves (ZW)^T(ZW) = V(Σ² − β_d I)_+V^T while rotating
// which latent directions drive which principal axes. An empty mixer means
// identity; otherwise it must be k×k with k = thresholded_rank(x, beta_d).
DataMatrix closed_form_linear_weights(const DataMatrix& z, const DataMatrix& x, double beta_d,
                                      const DataMatrix& mixer);

// Minimum-penalty weights meeting the first-moment constraint
// ‖1^TX − 1^TZW‖₂ ≤ β_d. SquaredFrobenius: closed form (shrink the target mean
// by β_d along its direction, least-norm solve); other penalties: projected
// subgradient descent onto the same constraint set.
DataMatrix mean_match_weights(const DataMatrix& z, const DataMatrix& x, double beta_d,
                              const Regularizer& reg = Regularizer::squared_frobenius());

// Generic engine: minimize reg(w) subject to every |a_j^T w + b_j| ≤ bound.
// Feasibility phase first (certifies Infeasible beyond tol), then a
// primal-dual splitting loop; the result is verified by feasibility within tol
// and a KKT stationarity residual below tol. Deterministic.
std::vector<double> solve_abs_constrained(const Regularizer& reg, const AbsConstraintSystem& sys,
                                          double tol = 1e-6);

// The 4n two-sided constraints of the 1-D interleaving program, expanded
// symbolically over w = (w_1..w_n) with the data sorted ascending; duplicate
// and vacuous rows are removed. Throws InvalidInput on duplicate data points.
AbsConstraintSystem build_1d_constraints(const std::vector<double>& x, double beta_d);

// Solve the 1-D program: minimize reg(w) over the constraint polytope of
// build_1d_constraints. Entry i of the result pairs with the i-th sorted data
// point.
std::vector<double> solve_1d_relu_program(const std::vector<double>& x, double beta_d,
                                          const Regularizer& reg = Regularizer::squared_frobenius(),
                                          double tol = 1e-6);

// Two-layer ReLU weights recovered from a convex solution, one neuron per
// active cone atom, with the balanced splitting w1 = h/√‖h‖, w2 = ±√‖h‖.
struct RecoveryResult {
    DataMatrix w1;  // d_r × m
    DataMatrix w2;  // m × d
    std::vector<std::size_t> source_pattern;  // arrangement index per neuron
    double objective = 0.0;  // Σ_i ‖u_i‖ + ‖v_i‖ of the convex program
};

// Reconstruct a two-layer ReLU generator whose outputs equal g_star on the
// given latents: solves, per output column, the cone-constrained group-norm
// program  min Σ_i ‖u_i‖ + ‖v_i‖  s.t.  Σ_i H^(i) Z (u_i − v_i) = g_star_col,
// (2H^(i)−I)Z u_i ≥ 0, (2H^(i)−I)Z v_i ≥ 0  over the complete arrangement
// list, then maps nonzero atoms to neurons. Verifies (ZW1)_+W2 = g_star
// within tol (RecoveryFailed otherwise); requires arrangements.complete
// (IncompleteArrangements otherwise).
RecoveryResult generator_recovery(const DataMatrix& z, const DataMatrix& g_star,
                                  const ArrangementSet& arrangements, double tol = 1e-6);

// Euclidean projection onto the polyhedral cone {h : c·h >= 0 for every row c
// of `normals`}; exact in one and two dimensions (half-line / angular-sector
// geometry), cyclic half-space projections in higher dimension.
std::vector<double> project_polyhedral_cone(const std::vector<double>& h,
                                            const std::vector<std::vector<double>>& normals);

}  // namespace cwgan
