#include "cwgan/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "cwgan/errors.hpp"
#include "cwgan/rng.hpp"

namespace cwgan {

namespace {

constexpr std::uint64_t kNetStream = 0x74776F6C;      // layer initialization
constexpr std::uint64_t kInterpStream = 0x677031;     // penalty interpolates
constexpr double kTinyNorm = 1e-12;

void require_net_shapes(const TwoLayerNet& net, const char* where) {
    if (net.first_layer.empty() || net.second_layer.empty()) {
        throw Error(ErrorKind::InvalidInput, std::string(where) + ": empty layer");
    }
    if (net.first_layer.cols() != net.second_layer.rows()) {
        throw Error(ErrorKind::DimensionMismatch,
                    std::string(where) + ": hidden widths disagree");
    }
    if (!net.bias.empty() && net.bias.size() != net.first_layer.cols()) {
        throw Error(ErrorKind::DimensionMismatch,
                    std::string(where) + ": bias length != hidden width");
    }
    require_finite(net.first_layer, where);
    require_finite(net.second_layer, where);
    for (double b : net.bias) {
        if (!std::isfinite(b)) {
            throw Error(ErrorKind::InvalidInput, std::string(where) + ": nonfinite bias");
        }
    }
}

// Pre-activations input * U + 1 b^T (n x m).
DataMatrix preactivations(const TwoLayerNet& net, const DataMatrix& input) {
    if (input.cols() != net.first_layer.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "forward: input width != first layer rows");
    }
    DataMatrix pre = matmul(input, net.first_layer);
    if (!net.bias.empty()) {
        for (std::size_t i = 0; i < pre.rows(); ++i) {
            for (std::size_t j = 0; j < pre.cols(); ++j) {
                pre(i, j) += net.bias[j];
            }
        }
    }
    return pre;
}

DataMatrix apply_activation(const Activation& act, const DataMatrix& pre) {
    DataMatrix out(pre.rows(), pre.cols());
    for (std::size_t i = 0; i < pre.size(); ++i) {
        out.data()[i] = act.apply(pre.data()[i]);
    }
    return out;
}

DataMatrix apply_derivative(const Activation& act, const DataMatrix& pre) {
    DataMatrix out(pre.rows(), pre.cols());
    for (std::size_t i = 0; i < pre.size(); ++i) {
        out.data()[i] = act.derivative(pre.data()[i]);
    }
    return out;
}

std::size_t net_width(const TwoLayerNet& net) { return net.first_layer.cols(); }

// Row sums of the output layer: the effective scalar weight of each neuron in
// the summed critic value.
std::vector<double> neuron_weights(const TwoLayerNet& net) {
    std::vector<double> w(net.second_layer.rows(), 0.0);
    for (std::size_t j = 0; j < net.second_layer.rows(); ++j) {
        for (std::size_t c = 0; c < net.second_layer.cols(); ++c) {
            w[j] += net.second_layer(j, c);
        }
    }
    return w;
}

double squared_weight_norm(const TwoLayerNet& net) {
    double s = frobenius_norm_squared(net.first_layer) +
               frobenius_norm_squared(net.second_layer);
    for (double b : net.bias) {
        s += b * b;
    }
    return s;
}

// Gradient of the squared critic-input norm penalty
//   lambda * mean_i (||grad_x D(t_i)|| - 1)^2
// accumulated into the given gradient holder (with a minus sign: the critic
// ascends core minus penalty).
void accumulate_gradient_penalty(const DataMatrix& interpolates, const TwoLayerNet& disc,
                                 double lambda, double* value, NetGrads* grads) {
    const std::size_t n = interpolates.rows();
    const std::size_t d = interpolates.cols();
    const DataMatrix pre = preactivations(disc, interpolates);
    const std::vector<double> vr = neuron_weights(disc);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // Critic input-gradient at this interpolate.
        std::vector<double> w(d, 0.0);
        for (std::size_t j = 0; j < vr.size(); ++j) {
            const double sd = disc.activation.derivative(pre(i, j)) * vr[j];
            if (sd == 0.0) continue;
            for (std::size_t c = 0; c < d; ++c) {
                w[c] += sd * disc.first_layer(c, j);
            }
        }
        const double nw = norm2(w);
        total += (nw - 1.0) * (nw - 1.0);
        if (grads == nullptr || nw < kTinyNorm) continue;
        const double ci = 2.0 * lambda / static_cast<double>(n) * (nw - 1.0);
        std::vector<double> e(d);
        for (std::size_t c = 0; c < d; ++c) e[c] = w[c] / nw;
        for (std::size_t j = 0; j < vr.size(); ++j) {
            const double sp = disc.activation.derivative(pre(i, j));
            const double spp = disc.activation.second_derivative(pre(i, j));
            double eu = 0.0;
            for (std::size_t c = 0; c < d; ++c) eu += e[c] * disc.first_layer(c, j);
            // Output layer: every column of row j carries the same weight.
            const double gv = ci * sp * eu;
            for (std::size_t c2 = 0; c2 < disc.second_layer.cols(); ++c2) {
                grads->second_layer(j, c2) -= gv;
            }
            for (std::size_t c = 0; c < d; ++c) {
                grads->first_layer(c, j) -=
                    ci * vr[j] * (sp * e[c] + spp * eu * interpolates(i, c));
            }
            if (!grads->bias.empty()) {
                grads->bias[j] -= ci * vr[j] * spp * eu;
            }
        }
    }
    if (value != nullptr) {
        *value += lambda * total / static_cast<double>(std::max<std::size_t>(n, 1));
    }
}

void check_penalty_config(double beta_d, double lambda_gp) {
    if (!std::isfinite(beta_d) || !std::isfinite(lambda_gp) || beta_d < 0.0 ||
        lambda_gp < 0.0) {
        throw Error(ErrorKind::InvalidInput, "penalty coefficients must be finite and >= 0");
    }
    if (beta_d > 0.0 && lambda_gp > 0.0) {
        throw Error(ErrorKind::InvalidInput,
                    "weight decay and gradient penalty are mutually exclusive");
    }
}

// Elementwise optimizer state for one tensor.
struct Moments {
    std::vector<double> m, v;
    explicit Moments(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void apply_update(double* params, const double* grad, std::size_t n, double rate,
                  double direction, const TrainConfig& cfg, Moments* mom, double t) {
    if (cfg.optimizer == OptimizerKind::PlainGda) {
        for (std::size_t i = 0; i < n; ++i) {
            params[i] += direction * rate * grad[i];
        }
        return;
    }
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    for (std::size_t i = 0; i < n; ++i) {
        mom->m[i] = b1 * mom->m[i] + (1.0 - b1) * grad[i];
        mom->v[i] = b2 * mom->v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double mhat = mom->m[i] / c1;
        const double vhat = mom->v[i] / c2;
        params[i] += direction * rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
}

}  // namespace

TwoLayerNet random_two_layer(std::size_t d, std::size_t m, std::size_t k,
                             const Activation& activation, bool with_bias,
                             double scale, std::uint64_t seed) {
    if (d == 0 || m == 0 || k == 0) {
        throw Error(ErrorKind::InvalidInput, "random_two_layer: zero dimension");
    }
    const CounterRng rng(seed, kNetStream);
    TwoLayerNet net;
    net.activation = activation;
    net.first_layer = rng.split(1).gaussian_matrix(d, m);
    net.first_layer *= scale;
    net.second_layer = rng.split(2).gaussian_matrix(m, k);
    net.second_layer *= scale;
    if (with_bias) {
        net.bias.resize(m);
        const CounterRng brng = rng.split(3);
        for (std::size_t j = 0; j < m; ++j) {
            net.bias[j] = scale * brng.gaussian(j);
        }
    }
    return net;
}

DataMatrix forward(const TwoLayerNet& net, const DataMatrix& input) {
    require_net_shapes(net, "forward");
    const DataMatrix pre = preactivations(net, input);
    return matmul(apply_activation(net.activation, pre), net.second_layer);
}

double minimax_core(const DataMatrix& x, const DataMatrix& gen_out, const TwoLayerNet& disc) {
    require_net_shapes(disc, "minimax_core");
    if (x.cols() != gen_out.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "minimax_core: sample widths disagree");
    }
    const DataMatrix sx = apply_activation(disc.activation, preactivations(disc, x));
    const DataMatrix sg = apply_activation(disc.activation, preactivations(disc, gen_out));
    const std::vector<double> vr = neuron_weights(disc);
    double core = 0.0;
    for (std::size_t j = 0; j < vr.size(); ++j) {
        double margin = 0.0;
        for (std::size_t i = 0; i < sx.rows(); ++i) margin += sx(i, j);
        for (std::size_t i = 0; i < sg.rows(); ++i) margin -= sg(i, j);
        core += margin * vr[j];
    }
    return core;
}

double discriminator_objective(const DataMatrix& x, const DataMatrix& gen_out,
                               const TwoLayerNet& disc, double beta_d, double lambda_gp,
                               const DataMatrix& interpolates, bool rescaled_penalty) {
    check_penalty_config(beta_d, lambda_gp);
    double obj = minimax_core(x, gen_out, disc);
    if (beta_d > 0.0) {
        if (rescaled_penalty || disc.activation.tag == Activation::Tag::Quadratic) {
            for (std::size_t i = 0; i < disc.second_layer.size(); ++i) {
                obj -= beta_d * std::abs(disc.second_layer.data()[i]);
            }
        } else {
            obj -= 0.5 * beta_d * squared_weight_norm(disc);
        }
    }
    if (lambda_gp > 0.0) {
        if (interpolates.cols() != x.cols()) {
            throw Error(ErrorKind::DimensionMismatch,
                        "discriminator_objective: interpolate width != data width");
        }
        double penalty = 0.0;
        accumulate_gradient_penalty(interpolates, disc, lambda_gp, &penalty, nullptr);
        obj -= penalty;
    }
    return obj;
}

NetGrads discriminator_gradients(const DataMatrix& x, const DataMatrix& gen_out,
                                 const TwoLayerNet& disc, double beta_d, double lambda_gp,
                                 const DataMatrix& interpolates, bool rescaled_penalty) {
    check_penalty_config(beta_d, lambda_gp);
    require_net_shapes(disc, "discriminator_gradients");
    if (x.cols() != gen_out.cols()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "discriminator_gradients: sample widths disagree");
    }
    const DataMatrix pre_x = preactivations(disc, x);
    const DataMatrix pre_g = preactivations(disc, gen_out);
    const DataMatrix dx = apply_derivative(disc.activation, pre_x);
    const DataMatrix dg = apply_derivative(disc.activation, pre_g);
    const DataMatrix sx = apply_activation(disc.activation, pre_x);
    const DataMatrix sg = apply_activation(disc.activation, pre_g);
    const std::vector<double> vr = neuron_weights(disc);
    const std::size_t m = net_width(disc);

    NetGrads g;
    g.first_layer = DataMatrix(disc.first_layer.rows(), m);
    g.second_layer = DataMatrix(disc.second_layer.rows(), disc.second_layer.cols());
    if (!disc.bias.empty()) g.bias.assign(m, 0.0);

    for (std::size_t j = 0; j < m; ++j) {
        double margin = 0.0;
        for (std::size_t i = 0; i < sx.rows(); ++i) margin += sx(i, j);
        for (std::size_t i = 0; i < sg.rows(); ++i) margin -= sg(i, j);
        for (std::size_t c = 0; c < g.second_layer.cols(); ++c) {
            g.second_layer(j, c) = margin;
        }
        for (std::size_t c = 0; c < disc.first_layer.rows(); ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < x.rows(); ++i) acc += x(i, c) * dx(i, j);
            for (std::size_t i = 0; i < gen_out.rows(); ++i) acc -= gen_out(i, c) * dg(i, j);
            g.first_layer(c, j) = acc * vr[j];
        }
        if (!g.bias.empty()) {
            double acc = 0.0;
            for (std::size_t i = 0; i < dx.rows(); ++i) acc += dx(i, j);
            for (std::size_t i = 0; i < dg.rows(); ++i) acc -= dg(i, j);
            g.bias[j] = acc * vr[j];
        }
    }

    if (beta_d > 0.0) {
        if (rescaled_penalty || disc.activation.tag == Activation::Tag::Quadratic) {
            for (std::size_t i = 0; i < disc.second_layer.size(); ++i) {
                const double v = disc.second_layer.data()[i];
                const double s = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
                g.second_layer.data()[i] -= beta_d * s;
            }
        } else {
            for (std::size_t i = 0; i < disc.first_layer.size(); ++i) {
                g.first_layer.data()[i] -= beta_d * disc.first_layer.data()[i];
            }
            for (std::size_t i = 0; i < disc.second_layer.size(); ++i) {
                g.second_layer.data()[i] -= beta_d * disc.second_layer.data()[i];
            }
            for (std::size_t j = 0; j < g.bias.size(); ++j) {
                g.bias[j] -= beta_d * disc.bias[j];
            }
        }
    }
    if (lambda_gp > 0.0) {
        if (interpolates.cols() != x.cols()) {
            throw Error(ErrorKind::DimensionMismatch,
                        "discriminator_gradients: interpolate width != data width");
        }
        accumulate_gradient_penalty(interpolates, disc, lambda_gp, nullptr, &g);
    }
    return g;
}

double generator_objective(const DataMatrix& x, const DataMatrix& z, const TwoLayerNet& gen,
                           const TwoLayerNet& disc, double gen_decay) {
    const DataMatrix out = forward(gen, z);
    return minimax_core(x, out, disc) + gen_decay * squared_weight_norm(gen);
}

NetGrads generator_gradients(const DataMatrix& x, const DataMatrix& z, const TwoLayerNet& gen,
                             const TwoLayerNet& disc, double gen_decay) {
    require_net_shapes(gen, "generator_gradients");
    require_net_shapes(disc, "generator_gradients");
    const DataMatrix pre_gen = preactivations(gen, z);
    const DataMatrix hidden = apply_activation(gen.activation, pre_gen);
    const DataMatrix out = matmul(hidden, gen.second_layer);
    if (out.cols() != x.cols()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "generator_gradients: generator output width != data width");
    }

    // d core / d out: minus the activated critic slope times neuron weight.
    const DataMatrix pre_d = preactivations(disc, out);
    const std::vector<double> vr = neuron_weights(disc);
    DataMatrix sens(out.rows(), out.cols(), 0.0);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        for (std::size_t j = 0; j < net_width(disc); ++j) {
            const double sd = disc.activation.derivative(pre_d(i, j)) * vr[j];
            if (sd == 0.0) continue;
            for (std::size_t c = 0; c < out.cols(); ++c) {
                sens(i, c) -= sd * disc.first_layer(c, j);
            }
        }
    }

    NetGrads g;
    g.second_layer = matmul(hidden.transpose(), sens);
    DataMatrix t = matmul(sens, gen.second_layer.transpose());
    for (std::size_t i = 0; i < t.size(); ++i) {
        t.data()[i] *= gen.activation.derivative(pre_gen.data()[i]);
    }
    g.first_layer = matmul(z.transpose(), t);
    if (!gen.bias.empty()) {
        g.bias.assign(gen.bias.size(), 0.0);
        for (std::size_t i = 0; i < t.rows(); ++i) {
            for (std::size_t j = 0; j < t.cols(); ++j) {
                g.bias[j] += t(i, j);
            }
        }
    }
    if (gen_decay != 0.0) {
        for (std::size_t i = 0; i < gen.first_layer.size(); ++i) {
            g.first_layer.data()[i] += 2.0 * gen_decay * gen.first_layer.data()[i];
        }
        for (std::size_t i = 0; i < gen.second_layer.size(); ++i) {
            g.second_layer.data()[i] += 2.0 * gen_decay * gen.second_layer.data()[i];
        }
        for (std::size_t j = 0; j < g.bias.size(); ++j) {
            g.bias[j] += 2.0 * gen_decay * gen.bias[j];
        }
    }
    return g;
}

TrainResult gda_train(const DataMatrix& x, const DataMatrix& z, const TwoLayerNet& gen,
                      const TwoLayerNet& disc, const TrainConfig& cfg) {
    require_net_shapes(gen, "gda_train");
    require_net_shapes(disc, "gda_train");
    require_finite(x, "gda_train");
    require_finite(z, "gda_train");
    if (!std::isfinite(cfg.gen_rate) || !std::isfinite(cfg.disc_rate) ||
        cfg.gen_rate < 0.0 || cfg.disc_rate < 0.0) {
        throw Error(ErrorKind::InvalidInput, "gda_train: learning rates must be >= 0");
    }
    if (cfg.steps == 0) {
        throw Error(ErrorKind::InvalidInput, "gda_train: steps must be >= 1");
    }
    check_penalty_config(cfg.beta_d, cfg.lambda_gp);

    TrainResult res;
    res.gen = gen;
    res.disc = disc;
    res.disc_losses.reserve(cfg.steps);
    res.gen_losses.reserve(cfg.steps);

    Moments dm_first(res.disc.first_layer.size());
    Moments dm_second(res.disc.second_layer.size());
    Moments dm_bias(res.disc.bias.size());
    Moments gm_first(res.gen.first_layer.size());
    Moments gm_second(res.gen.second_layer.size());
    Moments gm_bias(res.gen.bias.size());
    double disc_t = 0.0;
    double gen_t = 0.0;

    const CounterRng eps_rng(cfg.seed, kInterpStream);
    std::uint64_t eps_index = 0;
    const bool unit_ball_projection =
        cfg.beta_d > 0.0 && (cfg.rescaled_penalty ||
                             res.disc.activation.tag == Activation::Tag::Quadratic);

    for (std::size_t step = 0; step < cfg.steps; ++step) {
        for (std::size_t ds = 0; ds < cfg.disc_steps_per_gen; ++ds) {
            const DataMatrix out = forward(res.gen, z);
            DataMatrix interp;
            if (cfg.lambda_gp > 0.0) {
                interp = DataMatrix(out.rows(), out.cols());
                for (std::size_t i = 0; i < out.rows(); ++i) {
                    const double e = eps_rng.uniform(eps_index++);
                    const std::size_t r = i % x.rows();
                    for (std::size_t c = 0; c < out.cols(); ++c) {
                        interp(i, c) = e * x(r, c) + (1.0 - e) * out(i, c);
                    }
                }
            }
            const NetGrads g = discriminator_gradients(x, out, res.disc, cfg.beta_d,
                                                       cfg.lambda_gp, interp,
                                                       cfg.rescaled_penalty);
            disc_t += 1.0;
            apply_update(res.disc.first_layer.data(), g.first_layer.data(),
                         g.first_layer.size(), cfg.disc_rate, +1.0, cfg, &dm_first, disc_t);
            apply_update(res.disc.second_layer.data(), g.second_layer.data(),
                         g.second_layer.size(), cfg.disc_rate, +1.0, cfg, &dm_second, disc_t);
            if (!res.disc.bias.empty()) {
                apply_update(res.disc.bias.data(), g.bias.data(), g.bias.size(),
                             cfg.disc_rate, +1.0, cfg, &dm_bias, disc_t);
            }
            if (unit_ball_projection) {
                for (std::size_t j = 0; j < res.disc.first_layer.cols(); ++j) {
                    double n2 = 0.0;
                    for (std::size_t c = 0; c < res.disc.first_layer.rows(); ++c) {
                        n2 += res.disc.first_layer(c, j) * res.disc.first_layer(c, j);
                    }
                    const double n = std::sqrt(n2);
                    if (n > 1.0) {
                        for (std::size_t c = 0; c < res.disc.first_layer.rows(); ++c) {
                            res.disc.first_layer(c, j) /= n;
                        }
                    }
                }
            }
        }

        const NetGrads gg = generator_gradients(x, z, res.gen, res.disc, cfg.gen_decay);
        gen_t += 1.0;
        apply_update(res.gen.first_layer.data(), gg.first_layer.data(),
                     gg.first_layer.size(), cfg.gen_rate, -1.0, cfg, &gm_first, gen_t);
        apply_update(res.gen.second_layer.data(), gg.second_layer.data(),
                     gg.second_layer.size(), cfg.gen_rate, -1.0, cfg, &gm_second, gen_t);
        if (!res.gen.bias.empty()) {
            apply_update(res.gen.bias.data(), gg.bias.data(), gg.bias.size(), cfg.gen_rate,
                         -1.0, cfg, &gm_bias, gen_t);
        }

        const DataMatrix out = forward(res.gen, z);
        const double disc_loss = minimax_core(x, out, res.disc);
        const DataMatrix sg = apply_activation(res.disc.activation,
                                               preactivations(res.disc, out));
        const std::vector<double> vr = neuron_weights(res.disc);
        double fake_term = 0.0;
        for (std::size_t j = 0; j < vr.size(); ++j) {
            for (std::size_t i = 0; i < sg.rows(); ++i) fake_term += sg(i, j) * vr[j];
        }
        const double gen_loss = -fake_term;
        const bool finite_state = std::isfinite(disc_loss) && std::isfinite(gen_loss) &&
                                  res.gen.first_layer.all_finite() &&
                                  res.gen.second_layer.all_finite() &&
                                  res.disc.first_layer.all_finite() &&
                                  res.disc.second_layer.all_finite();
        if (!finite_state) {
            throw Error(ErrorKind::Diverged,
                        "gda_train: nonfinite state at step " + std::to_string(step));
        }
        // Finite but runaway iterates would reach inf within a few more steps;
        // flag them at the step where they become unmistakable.
        const double scale = std::max(max_abs_entry(res.gen.first_layer),
                                      max_abs_entry(res.disc.first_layer));
        if (std::max(scale, std::abs(disc_loss)) > 1e12) {
            throw Error(ErrorKind::Diverged,
                        "gda_train: runaway iterates at step " + std::to_string(step));
        }
        res.disc_losses.push_back(disc_loss);
        res.gen_losses.push_back(gen_loss);
    }
    return res;
}

TwoLayerNet balance_weights(const TwoLayerNet& net,
                            std::vector<std::size_t>* zeroed_neurons) {
    require_net_shapes(net, "balance_weights");
    if (net.activation.tag != Activation::Tag::Linear &&
        net.activation.tag != Activation::Tag::ReLU) {
        throw Error(ErrorKind::InvalidInput,
                    "balance_weights: activation must be positively homogeneous");
    }
    TwoLayerNet out = net;
    if (zeroed_neurons != nullptr) zeroed_neurons->clear();
    for (std::size_t j = 0; j < net.first_layer.cols(); ++j) {
        double nu2 = 0.0;
        for (std::size_t c = 0; c < net.first_layer.rows(); ++c) {
            nu2 += net.first_layer(c, j) * net.first_layer(c, j);
        }
        double nv2 = 0.0;
        for (std::size_t c = 0; c < net.second_layer.cols(); ++c) {
            nv2 += net.second_layer(j, c) * net.second_layer(j, c);
        }
        const double nu = std::sqrt(nu2);
        const double nv = std::sqrt(nv2);
        if (nu < kTinyNorm) {
            if (nv >= kTinyNorm) {
                // Dead input direction with live output: drop the neuron.
                for (std::size_t c = 0; c < out.second_layer.cols(); ++c) {
                    out.second_layer(j, c) = 0.0;
                }
                for (std::size_t c = 0; c < out.first_layer.rows(); ++c) {
                    out.first_layer(c, j) = 0.0;
                }
                if (!out.bias.empty()) out.bias[j] = 0.0;
                if (zeroed_neurons != nullptr) zeroed_neurons->push_back(j);
            }
            continue;
        }
        if (nv < kTinyNorm) {
            for (std::size_t c = 0; c < out.first_layer.rows(); ++c) {
                out.first_layer(c, j) = 0.0;
            }
            if (!out.bias.empty()) out.bias[j] = 0.0;
            continue;
        }
        const double alpha = std::sqrt(nv / nu);
        for (std::size_t c = 0; c < out.first_layer.rows(); ++c) {
            out.first_layer(c, j) *= alpha;
        }
        if (!out.bias.empty()) out.bias[j] *= alpha;
        for (std::size_t c = 0; c < out.second_layer.cols(); ++c) {
            out.second_layer(j, c) /= alpha;
        }
    }
    return out;
}

TrainConfig two_point_line_config() {
    TrainConfig cfg;
    cfg.gen_rate = 1e-3;
    cfg.disc_rate = 1e-3;
    cfg.steps = 8000;
    cfg.disc_steps_per_gen = 1;
    cfg.beta_d = 0.1;
    cfg.lambda_gp = 0.0;
    cfg.gen_decay = 0.02;
    cfg.optimizer = OptimizerKind::AdamLike;
    cfg.adam_beta1 = 0.5;
    cfg.adam_beta2 = 0.9;
    cfg.rescaled_penalty = true;
    return cfg;
}

double two_point_line_distance(const TwoLayerNet& gen) {
    const DataMatrix out = forward(gen, DataMatrix::identity(2));
    if (out.cols() != 1 || out.rows() != 2) {
        throw Error(ErrorKind::DimensionMismatch,
                    "two_point_line_distance: expected a 2x1 output");
    }
    const double lo = std::min(out(0, 0), out(1, 0));
    const double hi = std::max(out(0, 0), out(1, 0));
    return std::max(std::abs(lo + 0.9), std::abs(hi - 0.9));
}

double final_quarter_std(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    const std::size_t count = std::max<std::size_t>(values.size() / 4, 1);
    const std::size_t start = values.size() - count;
    double mean = 0.0;
    for (std::size_t i = start; i < values.size(); ++i) mean += values[i];
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (std::size_t i = start; i < values.size(); ++i) {
        var += (values[i] - mean) * (values[i] - mean);
    }
    return std::sqrt(var / static_cast<double>(count));
}

TwoPointRun run_two_point_line(std::uint64_t seed) {
    return run_line_experiment({-1.0, 1.0}, {-0.9, 0.9}, two_point_line_config(), seed);
}

TwoPointRun run_line_experiment(const std::vector<double>& xs,
                                const std::vector<double>& target,
                                const TrainConfig& cfg_in, std::uint64_t seed) {
    const std::size_t n = xs.size();
    if (n == 0) {
        throw Error(ErrorKind::InvalidInput, "line experiment needs at least one data point");
    }
    if (target.size() != n) {
        throw Error(ErrorKind::DimensionMismatch,
                    "target must hold one entry per data point");
    }
    DataMatrix x(n, 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) x(i, 0) = xs[i];
    const DataMatrix z = DataMatrix::identity(n);

    TwoLayerNet gen;
    gen.activation = Activation::linear();
    const CounterRng rng(seed, 0x746F7932);
    gen.first_layer = rng.split(1).gaussian_matrix(n, 1);
    gen.first_layer *= 0.25;
    gen.second_layer = DataMatrix{{1.0}};

    const TwoLayerNet disc =
        random_two_layer(1, 16, 1, Activation::relu(), true, 0.5, seed);

    TrainConfig cfg = cfg_in;
    cfg.seed = seed;

    TwoPointRun run;
    run.result = gda_train(x, z, gen, disc, cfg);
    const DataMatrix out = forward(run.result.gen, z);
    run.outputs.resize(n);
    for (std::size_t i = 0; i < n; ++i) run.outputs[i] = out(i, 0);
    std::sort(run.outputs.begin(), run.outputs.end());
    std::vector<double> sorted_target = target;
    std::sort(sorted_target.begin(), sorted_target.end());
    for (std::size_t i = 0; i < n; ++i) {
        run.distance_to_target = std::max(
            run.distance_to_target, std::abs(run.outputs[i] - sorted_target[i]));
    }
    run.loss_spread = final_quarter_std(run.result.disc_losses);
    return run;
}

}  // namespace cwgan
