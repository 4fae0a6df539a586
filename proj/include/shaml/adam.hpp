#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "shaml/errors.hpp"

namespace shaml {

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamState(std::size_t size = 0) : m(size, 0.0), v(size, 0.0) {}
};

// Standard bias-corrected Adam update; t is 1-based.
inline void adam_step(std::span<double> params, std::span<const double> grads,
                      AdamState& state, long t, double lr, double beta1 = 0.9,
                      double beta2 = 0.999, double eps = 1e-8) {
    if (params.size() != grads.size() || params.size() != state.m.size() ||
        params.size() != state.v.size())
        throw DimensionMismatch("adam_step shapes");
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace shaml
