#ifndef GWAD_ADAM_HPP
#define GWAD_ADAM_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "gwad/tensor.hpp"

namespace gwad::nn {

struct AdamConfig {
    float lr = 1e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float epsilon = 1e-8f;
};

// First/second moment accumulators, one pair per parameter tensor.
struct AdamState {
    AdamConfig cfg;
    std::int64_t step_count = 0;
    std::vector<std::vector<float>> m, v;

    void init(const std::vector<Tensor*>& params) {
        if (!(cfg.lr > 0.0f) || cfg.beta1 < 0.0f || cfg.beta1 >= 1.0f || cfg.beta2 < 0.0f ||
            cfg.beta2 >= 1.0f)
            throw ShapeMismatch("adam: invalid hyperparameters");
        step_count = 0;
        m.clear();
        v.clear();
        for (const Tensor* p : params) {
            m.emplace_back(p->values.size(), 0.0f);
            v.emplace_back(p->values.size(), 0.0f);
        }
    }
};

// One optimizer step over params[i]->grad with bias correction.
inline void adam_step(const std::vector<Tensor*>& params, AdamState& state) {
    if (params.size() != state.m.size() || params.size() != state.v.size())
        throw ShapeMismatch("adam: state does not match parameter list");
    ++state.step_count;
    const float b1t = 1.0f - std::pow(state.cfg.beta1, static_cast<float>(state.step_count));
    const float b2t = 1.0f - std::pow(state.cfg.beta2, static_cast<float>(state.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        if (p.grad.size() != p.values.size())
            throw ShapeMismatch("adam: parameter has no gradient");
        if (state.m[i].size() != p.values.size())
            throw ShapeMismatch("adam: moment shape does not match parameter");
        float* m = state.m[i].data();
        float* v = state.v[i].data();
        const float* g = p.grad.data();
        float* x = p.values.data();
        for (std::size_t k = 0; k < p.values.size(); ++k) {
            m[k] = state.cfg.beta1 * m[k] + (1.0f - state.cfg.beta1) * g[k];
            v[k] = state.cfg.beta2 * v[k] + (1.0f - state.cfg.beta2) * g[k] * g[k];
            const float mhat = m[k] / b1t;
            const float vhat = v[k] / b2t;
            x[k] -= state.cfg.lr * mhat / (std::sqrt(vhat) + state.cfg.epsilon);
        }
    }
}

}  // namespace gwad::nn

#endif  // GWAD_ADAM_HPP
