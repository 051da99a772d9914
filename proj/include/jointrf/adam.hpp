#pragma once

#include <span>
#include <vector>

#include "jointrf/core.hpp"

namespace jointrf {

/// First/second-moment adaptive optimizer state for one parameter block.
struct AdamState {
    std::vector<Real> m, v;
    long step = 0;
    Real beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected update. `params` and `grads` must match the state size.
inline void adam_step(std::span<Real> params, std::span<const Real> grads, AdamState& st,
                      Real lr) {
    if (params.size() != grads.size() || params.size() != st.m.size())
        throw std::invalid_argument("adam_step: shape mismatch");
    st.step += 1;
    const Real bc1 = 1 - std::pow(st.beta1, static_cast<Real>(st.step));
    const Real bc2 = 1 - std::pow(st.beta2, static_cast<Real>(st.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        st.m[i] = st.beta1 * st.m[i] + (1 - st.beta1) * grads[i];
        st.v[i] = st.beta2 * st.v[i] + (1 - st.beta2) * grads[i] * grads[i];
        params[i] -= lr * (st.m[i] / bc1) / (std::sqrt(st.v[i] / bc2) + st.eps);
    }
}

}  // namespace jointrf
