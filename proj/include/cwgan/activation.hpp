#pragma once

#include <string>

namespace cwgan {

// Discriminator/generator activation. Polynomial(1,0,0) behaves identically to
// Quadratic and Polynomial(0,1,0) to Linear; tests rely on that equivalence.
struct Activation {
    enum class Tag { Linear, Quadratic, ReLU, Polynomial };

    Tag tag = Tag::Linear;
    double a = 0.0, b = 0.0, c = 0.0;  // polynomial coefficients a·t² + b·t + c

    static Activation linear() { return {Tag::Linear, 0.0, 1.0, 0.0}; }
    static Activation quadratic() { return {Tag::Quadratic, 1.0, 0.0, 0.0}; }
    static Activation relu() { return {Tag::ReLU, 0.0, 0.0, 0.0}; }
    static Activation polynomial(double a, double b, double c) {
        return {Tag::Polynomial, a, b, c};
    }

    double apply(double t) const {
        switch (tag) {
            case Tag::Linear: return t;
            case Tag::Quadratic: return t * t;
            case Tag::ReLU: return t > 0.0 ? t : 0.0;
            case Tag::Polynomial: return a * t * t + b * t + c;
        }
        return t;
    }

    // Derivative; the ReLU kink uses subgradient 0.
    double derivative(double t) const {
        switch (tag) {
            case Tag::Linear: return 1.0;
            case Tag::Quadratic: return 2.0 * t;
            case Tag::ReLU: return t > 0.0 ? 1.0 : 0.0;
            case Tag::Polynomial: return 2.0 * a * t + b;
        }
        return 1.0;
    }

    // Second derivative; zero almost everywhere for the piecewise-linear kinds.
    double second_derivative(double t) const {
        (void)t;
        switch (tag) {
            case Tag::Linear: return 0.0;
            case Tag::Quadratic: return 2.0;
            case Tag::ReLU: return 0.0;
            case Tag::Polynomial: return 2.0 * a;
        }
        return 0.0;
    }

    std::string name() const {
        switch (tag) {
            case Tag::Linear: return "linear";
            case Tag::Quadratic: return "quadratic";
            case Tag::ReLU: return "relu";
            case Tag::Polynomial:
                return "polynomial(" + std::to_string(a) + "," + std::to_string(b) + "," +
                       std::to_string(c) + ")";
        }
        return "unknown";
    }
};

}  // namespace cwgan
