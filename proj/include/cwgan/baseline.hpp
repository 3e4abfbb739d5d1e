#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cwgan/activation.hpp"
#include "cwgan/matrix.hpp"

namespace cwgan {

// Small fully-connected two-layer network:
//   output(A) = sigma(A * first_layer + 1 * bias^T) * second_layer
// with first_layer d x m, second_layer m x k, optional bias of length m.
struct TwoLayerNet {
    DataMatrix first_layer;
    DataMatrix second_layer;
    std::vector<double> bias;  // empty means no bias term
    Activation activation = Activation::relu();
};

// Gaussian-initialized net; deterministic in (seed). Bias entries are drawn at
// the same scale when with_bias is set.
TwoLayerNet random_two_layer(std::size_t d, std::size_t m, std::size_t k,
                             const Activation& activation, bool with_bias,
                             double scale, std::uint64_t seed);

// Forward pass; throws DimensionMismatch on shape disagreement.
DataMatrix forward(const TwoLayerNet& net, const DataMatrix& input);

enum class OptimizerKind { PlainGda, AdamLike };

// Full-batch alternating-gradient training configuration. Exactly one of
// beta_d (weight decay on the critic; for quadratic activation an absolute
// penalty on the output layer with the input columns projected to the unit
// ball) and lambda_gp (two-sided unit-norm gradient penalty at random
// interpolates) may be positive.
struct TrainConfig {
    double gen_rate = 1e-3;
    double disc_rate = 1e-3;
    std::size_t steps = 100;
    std::size_t disc_steps_per_gen = 1;
    double beta_d = 0.0;
    double lambda_gp = 0.0;
    double gen_decay = 0.0;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::PlainGda;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    // When set (and beta_d > 0), any positively homogeneous critic uses the
    // rescaled penalty beta_d * sum_j |v_j| with each input column projected
    // onto the unit ball — the form the per-neuron balancing identity makes
    // equivalent to plain weight decay. Quadratic critics always use it.
    bool rescaled_penalty = false;
};

// Per-tensor gradients for one network (bias slot empty when the net has none).
struct NetGrads {
    DataMatrix first_layer;
    DataMatrix second_layer;
    std::vector<double> bias;
};

// Critic value sum_j [1^T sigma(x u_j + b_j) - 1^T sigma(g u_j + b_j)] v_j
// (summed over output columns when second_layer has several).
double minimax_core(const DataMatrix& x, const DataMatrix& gen_out, const TwoLayerNet& disc);

// Critic objective to ASCEND: core minus the configured penalty. The
// interpolates matrix is consulted only when lambda_gp > 0 and must then have
// the same column count as x.
double discriminator_objective(const DataMatrix& x, const DataMatrix& gen_out,
                               const TwoLayerNet& disc, double beta_d, double lambda_gp,
                               const DataMatrix& interpolates,
                               bool rescaled_penalty = false);
NetGrads discriminator_gradients(const DataMatrix& x, const DataMatrix& gen_out,
                                 const TwoLayerNet& disc, double beta_d, double lambda_gp,
                                 const DataMatrix& interpolates,
                                 bool rescaled_penalty = false);

// Generator objective to DESCEND: core evaluated at forward(gen, z) plus
// gen_decay times the squared weight norm of the generator.
double generator_objective(const DataMatrix& x, const DataMatrix& z, const TwoLayerNet& gen,
                           const TwoLayerNet& disc, double gen_decay);
NetGrads generator_gradients(const DataMatrix& x, const DataMatrix& z, const TwoLayerNet& gen,
                             const TwoLayerNet& disc, double gen_decay);

// Trained nets plus one recorded (disc_loss, gen_loss) pair per outer step.
struct TrainResult {
    TwoLayerNet gen;
    TwoLayerNet disc;
    std::vector<double> disc_losses;
    std::vector<double> gen_losses;
};

// Alternating full-batch ascent/descent: disc_steps_per_gen critic updates,
// then one generator update, for cfg.steps outer steps. Deterministic given
// cfg.seed. Throws Diverged (with the step index) when a loss or weight stops
// being finite.
TrainResult gda_train(const DataMatrix& x, const DataMatrix& z, const TwoLayerNet& gen,
                      const TwoLayerNet& disc, const TrainConfig& cfg);

// Per-neuron rescaling u_j <- a_j u_j, b_j <- a_j b_j, v_j <- v_j / a_j with
// a_j = sqrt(|v_j| / ||u_j||): output-preserving for positively homogeneous
// activations, and afterwards sum_j(||u_j||^2 + |v_j|^2) = 2 sum_j ||u_j|| |v_j|.
// Neurons with a zero input column but nonzero output row are zeroed out and
// their indices reported through zeroed_neurons when it is non-null.
TwoLayerNet balance_weights(const TwoLayerNet& net,
                            std::vector<std::size_t>* zeroed_neurons = nullptr);

// Hyper-parameters used by the two-point line experiment (data x = (-1, 1),
// identity latents, directly parametrized generator). Chosen so that across a
// small seed sweep some runs settle at the shrunk data points and others keep
// oscillating.
TrainConfig two_point_line_config();

// Distance of forward(gen, I_2) from the shrunk two-point target (-0.9, 0.9).
double two_point_line_distance(const TwoLayerNet& gen);

// Population standard deviation of the last quarter of a loss trace; the
// oscillation detector used by the seed sweep.
double final_quarter_std(const std::vector<double>& values);

// One seeded run of a 1-D line experiment.
struct TwoPointRun {
    TrainResult result;
    std::vector<double> outputs;  // final generator outputs, sorted ascending
    double distance_to_target = 0.0;
    double loss_spread = 0.0;
};
TwoPointRun run_two_point_line(std::uint64_t seed);

// General 1-D line experiment: data rows `xs`, identity latents, a linear
// one-column generator initialized from the seed, and a fresh ReLU critic.
// distance_to_target = max_i |sorted_output_i - target_i| (target must have
// one entry per data point). run_two_point_line is this with xs = (-1, 1),
// target = (-0.9, 0.9), and two_point_line_config().
TwoPointRun run_line_experiment(const std::vector<double>& xs,
                                const std::vector<double>& target,
                                const TrainConfig& cfg, std::uint64_t seed);

}  // namespace cwgan
