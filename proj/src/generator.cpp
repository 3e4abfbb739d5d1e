#include "cwgan/generator.hpp"

#include <utility>

#include "cwgan/errors.hpp"

namespace cwgan {

GeneratorModel GeneratorModel::linear(DataMatrix w) {
    GeneratorModel m;
    m.kind_ = Kind::Linear;
    m.w_ = std::move(w);
    return m;
}

GeneratorModel GeneratorModel::two_layer_relu(DataMatrix w1, DataMatrix w2) {
    if (w1.cols() != w2.rows()) {
        fail(ErrorKind::DimensionMismatch, "hidden widths of the two layers differ");
    }
    GeneratorModel m;
    m.kind_ = Kind::TwoLayerReLU;
    m.w1_ = std::move(w1);
    m.w2_ = std::move(w2);
    return m;
}

GeneratorModel GeneratorModel::two_layer_poly(double a, double b, double c, DataMatrix w) {
    GeneratorModel m;
    m.kind_ = Kind::TwoLayerPoly;
    m.a_ = a;
    m.b_ = b;
    m.c_ = c;
    m.w_ = std::move(w);
    return m;
}

DataMatrix GeneratorModel::evaluate(const DataMatrix& z) const {
    switch (kind_) {
        case Kind::Linear:
            return matmul(z, w_);
        case Kind::TwoLayerReLU: {
            DataMatrix hidden = matmul(z, w1_);
            for (std::size_t i = 0; i < hidden.rows(); ++i) {
                for (std::size_t j = 0; j < hidden.cols(); ++j) {
                    if (hidden(i, j) < 0.0) hidden(i, j) = 0.0;
                }
            }
            return matmul(hidden, w2_);
        }
        case Kind::TwoLayerPoly:
            return matmul(polynomial_lift(z, a_, b_, c_), w_);
    }
    fail(ErrorKind::InvalidInput, "unknown generator kind");
}

DataMatrix polynomial_lift(const DataMatrix& z, double a, double b, double c) {
    require_finite(z, "polynomial lift");
    const std::size_t n = z.rows();
    const std::size_t d = z.cols();
    DataMatrix out(n, d * d + d + 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t col = 0;
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t s = 0; s < d; ++s) {
                out(i, col++) = a * z(i, r) * z(i, s);
            }
        }
        for (std::size_t r = 0; r < d; ++r) out(i, col++) = b * z(i, r);
        out(i, col) = c;
    }
    return out;
}

}  // namespace cwgan
