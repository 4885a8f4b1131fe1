#pragma once
#include <cmath>
#include <string>
#include <vector>

#include "coref/matrix.hpp"
#include "coref/rng.hpp"

namespace coref {

struct ParamTensor {
    std::string name;
    Matrix value, grad, m, v; // value, gradient, Adam moments, all shape-identical

    ParamTensor() = default;
    ParamTensor(std::string n, size_t rows, size_t cols)
        : name(std::move(n)), value(rows, cols), grad(rows, cols), m(rows, cols), v(rows, cols) {}

    size_t rows() const { return value.rows; }
    size_t cols() const { return value.cols; }
    void zero_grad() { grad.fill(0.0); }
};

inline void glorot_init(ParamTensor& p, Rng& rng, double gain = 1.0) {
    double fan_in = double(p.value.rows), fan_out = double(p.value.cols);
    double s = gain * std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : p.value.a) w = rng.uniform(-s, s);
}

struct AdamwConfig {
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, weight_decay = 0.01;
};

// Decoupled weight decay, bias-corrected moments. Grads are zeroed afterward.
inline void adamw_step(const std::vector<ParamTensor*>& params, double lr,
                       const AdamwConfig& cfg, long step_index) {
    if (step_index < 1) throw data_error("adamw_step: step_index must be >= 1");
    double bc1 = 1.0 - std::pow(cfg.beta1, double(step_index));
    double bc2 = 1.0 - std::pow(cfg.beta2, double(step_index));
    for (ParamTensor* p : params) {
        for (double g : p->grad.a)
            if (!std::isfinite(g))
                throw numeric_error("non-finite gradient in tensor " + p->name);
        for (size_t i = 0; i < p->value.a.size(); ++i) {
            double g = p->grad.a[i];
            p->m.a[i] = cfg.beta1 * p->m.a[i] + (1.0 - cfg.beta1) * g;
            p->v.a[i] = cfg.beta2 * p->v.a[i] + (1.0 - cfg.beta2) * g * g;
            double mhat = p->m.a[i] / bc1;
            double vhat = p->v.a[i] / bc2;
            p->value.a[i] -= lr * (mhat / (std::sqrt(vhat) + cfg.eps)
                                   + cfg.weight_decay * p->value.a[i]);
        }
        p->zero_grad();
    }
}

} // namespace coref
