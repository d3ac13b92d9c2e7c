#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "arf/errors.hpp"
#include "arf/field.hpp"

namespace arf {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Moments are kept in double regardless of the parameter scalar; the update is
// computed in double and cast back, so runs are bit-reproducible for both
// precisions.
struct AdamState {
    std::int64_t step = 0;
    std::vector<std::vector<double>> m, v;
};

template <typename T>
AdamState adam_init(const std::vector<ParamBlock<T>>& blocks) {
    AdamState st;
    st.m.reserve(blocks.size());
    st.v.reserve(blocks.size());
    for (const auto& b : blocks) {
        st.m.emplace_back(b.size, 0.0);
        st.v.emplace_back(b.size, 0.0);
    }
    return st;
}

// Bias-corrected Adam step. Non-finite gradients abort with the offending
// parameter block named, before any parameter or moment is touched.
template <typename T>
void adam_step(const std::vector<ParamBlock<T>>& blocks, AdamState& st, double lr,
               const AdamConfig& cfg) {
    if (st.m.size() != blocks.size()) throw UsageError("adam_step: state does not match blocks");
    for (const auto& blk : blocks)
        for (std::size_t i = 0; i < blk.size; ++i)
            if (!std::isfinite(double(blk.grads[i])))
                throw UsageError("adam_step: non-finite gradient in block " + blk.name);
    st.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, double(st.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, double(st.step));
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const auto& blk = blocks[bi];
        std::vector<double>& m = st.m[bi];
        std::vector<double>& v = st.v[bi];
        if (m.size() != blk.size) throw UsageError("adam_step: state does not match blocks");
        for (std::size_t i = 0; i < blk.size; ++i) {
            const double g = double(blk.grads[i]);
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            blk.values[i] =
                T(double(blk.values[i]) - lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
        }
    }
}

}  // namespace arf
