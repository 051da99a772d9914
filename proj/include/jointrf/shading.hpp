#pragma once

#include <vector>

#include "jointrf/core.hpp"

namespace jointrf {

inline constexpr int kDirectionEncodingWidth = 9;  // real SH, degrees 0..2

/// Real spherical harmonics of the view direction up to degree 2.
/// Fixed 9-wide encoding; d must be unit length.
inline std::array<Real, kDirectionEncodingWidth> direction_encode(const Vec3& d) {
    if (std::abs(d.norm() - 1.0) > 1e-6)
        throw std::domain_error("direction_encode: direction must be unit length");
    const Real x = d.x, y = d.y, z = d.z;
    return {
        0.28209479177387814,                          // l=0
        -0.48860251190291987 * y,                     // l=1, m=-1
        0.48860251190291987 * z,                      // l=1, m=0
        -0.48860251190291987 * x,                     // l=1, m=1
        1.0925484305920792 * x * y,                   // l=2, m=-2
        -1.0925484305920792 * y * z,                  // l=2, m=-1
        0.31539156525252005 * (3 * z * z - 1),        // l=2, m=0
        -1.0925484305920792 * x * z,                  // l=2, m=1
        0.5462742152960396 * (x * x - y * y),         // l=2, m=2
    };
}

/// Tiny MLP mapping (feature product, encoded direction) to (rgb, raw density).
/// ReLU hidden layers; output activations (sigmoid / softplus) are applied by
/// the caller so gradients can be checked on the raw head.
struct ShadingNetwork {
    std::vector<int> layer_sizes;          // [in, hidden..., 4]
    std::vector<std::vector<Real>> weights;  // row-major [out x in] per layer
    std::vector<std::vector<Real>> biases;

    ShadingNetwork() = default;

    ShadingNetwork(int feature_width, int hidden_width, int hidden_layers, RandomStream& rng) {
        layer_sizes.push_back(feature_width + kDirectionEncodingWidth);
        for (int i = 0; i < hidden_layers; ++i) layer_sizes.push_back(hidden_width);
        layer_sizes.push_back(4);
        for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
            int in = layer_sizes[l], out = layer_sizes[l + 1];
            std::vector<Real> w(static_cast<std::size_t>(out) * in);
            Real bound = std::sqrt(6.0 / (in + out));
            for (Real& v : w) v = rng.uniform(-bound, bound);
            weights.push_back(std::move(w));
            biases.push_back(std::vector<Real>(out, 0.0));
        }
    }

    int input_width() const { return layer_sizes.front(); }
    int num_layers() const { return static_cast<int>(weights.size()); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < weights.size(); ++l)
            n += weights[l].size() + biases[l].size();
        return n;
    }

    int max_width() const {
        int m = 0;
        for (int s : layer_sizes) m = std::max(m, s);
        return m;
    }

    /// Forward pass. `acts` receives the post-activation values of every layer
    /// (input first, raw 4-wide head last); needed again by backward().
    void forward(const Real* input, std::vector<std::vector<Real>>& acts) const {
        acts.resize(layer_sizes.size());
        acts[0].assign(input, input + layer_sizes[0]);
        for (int l = 0; l < num_layers(); ++l) {
            int in = layer_sizes[l], out = layer_sizes[l + 1];
            acts[l + 1].assign(out, 0.0);
            const Real* w = weights[l].data();
            for (int o = 0; o < out; ++o) {
                Real s = biases[l][o];
                const Real* row = w + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) s += row[i] * acts[l][i];
                // ReLU on hidden layers, identity on the head
                acts[l + 1][o] = (l + 1 < num_layers()) ? std::max<Real>(s, 0) : s;
            }
        }
    }

    /// Backward pass from dL/d(raw head). Accumulates into grad_w/grad_b
    /// (same shapes as weights/biases) and writes dL/dinput.
    void backward(const std::vector<std::vector<Real>>& acts, const Real* dhead,
                  std::vector<std::vector<Real>>& grad_w,
                  std::vector<std::vector<Real>>& grad_b, Real* dinput) const {
        std::vector<Real> delta(dhead, dhead + 4);
        std::vector<Real> next;
        for (int l = num_layers() - 1; l >= 0; --l) {
            int in = layer_sizes[l], out = layer_sizes[l + 1];
            if (l + 1 < num_layers())  // ReLU mask (hidden layers only)
                for (int o = 0; o < out; ++o)
                    if (acts[l + 1][o] <= 0) delta[o] = 0;
            next.assign(in, 0.0);
            const Real* w = weights[l].data();
            Real* gw = grad_w[l].data();
            for (int o = 0; o < out; ++o) {
                const Real d = delta[o];
                grad_b[l][o] += d;
                const Real* row = w + static_cast<std::size_t>(o) * in;
                Real* grow = gw + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) {
                    grow[i] += d * acts[l][i];
                    next[i] += d * row[i];
                }
            }
            delta.swap(next);
        }
        for (int i = 0; i < layer_sizes[0]; ++i) dinput[i] = delta[i];
    }

    /// As backward(), but skips weight gradients (frozen-network path).
    void backward_input_only(const std::vector<std::vector<Real>>& acts, const Real* dhead,
                             Real* dinput) const {
        std::vector<Real> delta(dhead, dhead + 4);
        std::vector<Real> next;
        for (int l = num_layers() - 1; l >= 0; --l) {
            int in = layer_sizes[l], out = layer_sizes[l + 1];
            if (l + 1 < num_layers())
                for (int o = 0; o < out; ++o)
                    if (acts[l + 1][o] <= 0) delta[o] = 0;
            next.assign(in, 0.0);
            const Real* w = weights[l].data();
            for (int o = 0; o < out; ++o) {
                const Real d = delta[o];
                const Real* row = w + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) next[i] += d * row[i];
            }
            delta.swap(next);
        }
        for (int i = 0; i < layer_sizes[0]; ++i) dinput[i] = delta[i];
    }

    bool all_finite() const {
        for (const auto& w : weights)
            for (Real v : w)
                if (!std::isfinite(v)) return false;
        for (const auto& b : biases)
            for (Real v : b)
                if (!std::isfinite(v)) return false;
        return true;
    }
};

}  // namespace jointrf
