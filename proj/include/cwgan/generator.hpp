#pragma once

#include "cwgan/matrix.hpp"

namespace cwgan {

// The three generator families with closed-form convex training paths: linear
// maps, two-layer ReLU networks, and two-layer polynomial-activation networks
// (evaluated through the quadratic lifting of the latent matrix).
class GeneratorModel {
public:
    enum class Kind { Linear, TwoLayerReLU, TwoLayerPoly };

    static GeneratorModel linear(DataMatrix w);
    static GeneratorModel two_layer_relu(DataMatrix w1, DataMatrix w2);
    static GeneratorModel two_layer_poly(double a, double b, double c, DataMatrix w);

    Kind kind() const { return kind_; }
    const DataMatrix& w() const { return w_; }    // Linear / TwoLayerPoly weights
    const DataMatrix& w1() const { return w1_; }  // ReLU first layer, d_r × m
    const DataMatrix& w2() const { return w2_; }  // ReLU second layer, m × d
    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }

    // Generated samples for latent rows Z: Linear → ZW; TwoLayerReLU →
    // (ZW1)_+W2; TwoLayerPoly → lift(Z, a, b, c)·W.
    DataMatrix evaluate(const DataMatrix& z) const;

private:
    Kind kind_ = Kind::Linear;
    DataMatrix w_, w1_, w2_;
    double a_ = 0.0, b_ = 0.0, c_ = 0.0;
};

// Lifted latent features for polynomial activations: row i becomes
// (a·vec(z_i z_i^T), b·z_i, c), width d_r² + d_r + 1.
DataMatrix polynomial_lift(const DataMatrix& z, double a, double b, double c);

}  // namespace cwgan
