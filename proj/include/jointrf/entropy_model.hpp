#pragma once

#include <vector>

#include "jointrf/core.hpp"

namespace jointrf {

/// Learned per-channel CDF: K composed monotone layers. Scales are kept
/// positive via exponentiation, gates bounded via tanh, and the final layer
/// squashes to (0,1) with a sigmoid, so the map is monotone by construction
/// and makes no assumption about the data distribution.
///
/// Per-channel layer stack (width w):
///   l = 0:        pre = y * exp(s) + b;        out = pre + tanh(g) .* tanh(pre)
///   l = 1..K-2:   pre = exp(S) v + b;          out = pre + tanh(g) .* tanh(pre)
///   l = K-1:      logit = exp(s) . v + b;      cdf = sigmoid(logit)
class EntropyModel {
public:
    static constexpr int kWidth = 3;
    static constexpr int kLayers = 4;
    static constexpr Real kProbFloor = 1.0 / 65536;  // matches coder frequency precision

    EntropyModel() = default;

    EntropyModel(int channels, RandomStream& rng) : channels_(channels) {
        params_.assign(static_cast<std::size_t>(channels) * kParamsPerChannel, 0.0);
        for (int ch = 0; ch < channels; ++ch) init_channel(ch, rng);
    }

    int channels() const { return channels_; }
    std::vector<Real>& params() { return params_; }
    const std::vector<Real>& params() const { return params_; }
    static constexpr int params_per_channel() { return kParamsPerChannel; }

    /// CDF value in (0,1). Accumulates d(cdf)/d(params) into `dparams`
    /// (scaled by `upstream`) and d(cdf)/dy into *dy when non-null.
    Real cdf_grad(int channel, Real y, Real upstream = 0, Real* dparams = nullptr,
                  Real* dy = nullptr) const {
        if (channel < 0 || channel >= channels_)
            throw std::invalid_argument("entropy model: channel out of range");
        const Real* p = params_.data() + static_cast<std::size_t>(channel) * kParamsPerChannel;

        // ---- forward, keeping intermediates ----
        Real v[kLayers][kWidth];       // layer outputs
        Real pre[kLayers][kWidth];     // pre-gate values
        Real in0 = y;

        const Real* s0 = p;                 // w
        const Real* b0 = p + kWidth;        // w
        const Real* g0 = p + 2 * kWidth;    // w
        for (int i = 0; i < kWidth; ++i) {
            pre[0][i] = in0 * std::exp(s0[i]) + b0[i];
            v[0][i] = pre[0][i] + std::tanh(g0[i]) * std::tanh(pre[0][i]);
        }
        int off = 3 * kWidth;
        for (int l = 1; l < kLayers - 1; ++l) {
            const Real* S = p + off;                       // w*w
            const Real* b = p + off + kWidth * kWidth;     // w
            const Real* g = b + kWidth;                    // w
            for (int i = 0; i < kWidth; ++i) {
                Real acc = b[i];
                for (int j = 0; j < kWidth; ++j)
                    acc += std::exp(S[i * kWidth + j]) * v[l - 1][j];
                pre[l][i] = acc;
                v[l][i] = acc + std::tanh(g[i]) * std::tanh(acc);
            }
            off += kWidth * kWidth + 2 * kWidth;
        }
        const Real* sf = p + off;           // w
        const Real bf = p[off + kWidth];    // 1
        Real logit = bf;
        for (int j = 0; j < kWidth; ++j) logit += std::exp(sf[j]) * v[kLayers - 2][j];
        const Real c = sigmoid(logit);

        if (upstream == 0 && !dy) return c;

        // ---- backward ----
        const Real dlogit = c * (1 - c);
        Real dv[kWidth];
        if (dparams) {
            for (int j = 0; j < kWidth; ++j) {
                dparams[static_cast<std::size_t>(channel) * kParamsPerChannel + off + j] +=
                    upstream * dlogit * std::exp(sf[j]) * v[kLayers - 2][j];
            }
            dparams[static_cast<std::size_t>(channel) * kParamsPerChannel + off + kWidth] +=
                upstream * dlogit;
        }
        for (int j = 0; j < kWidth; ++j) dv[j] = dlogit * std::exp(sf[j]);

        for (int l = kLayers - 2; l >= 1; --l) {
            off -= kWidth * kWidth + 2 * kWidth;
            const Real* S = p + off;
            const Real* g = p + off + kWidth * kWidth + kWidth;
            Real dpre[kWidth];
            for (int i = 0; i < kWidth; ++i) {
                const Real tg = std::tanh(g[i]);
                const Real tp = std::tanh(pre[l][i]);
                dpre[i] = dv[i] * (1 + tg * (1 - tp * tp));
                if (dparams) {
                    std::size_t base = static_cast<std::size_t>(channel) * kParamsPerChannel + off;
                    dparams[base + kWidth * kWidth + kWidth + i] +=
                        upstream * dv[i] * tp * (1 - tg * tg);  // gate
                    dparams[base + kWidth * kWidth + i] += upstream * dpre[i];  // bias
                    for (int j = 0; j < kWidth; ++j)
                        dparams[base + i * kWidth + j] +=
                            upstream * dpre[i] * std::exp(S[i * kWidth + j]) * v[l - 1][j];
                }
            }
            Real dnext[kWidth] = {0, 0, 0};
            for (int i = 0; i < kWidth; ++i)
                for (int j = 0; j < kWidth; ++j)
                    dnext[j] += dpre[i] * std::exp(S[i * kWidth + j]);
            for (int j = 0; j < kWidth; ++j) dv[j] = dnext[j];
        }

        Real dy_acc = 0;
        for (int i = 0; i < kWidth; ++i) {
            const Real tg = std::tanh(g0[i]);
            const Real tp = std::tanh(pre[0][i]);
            const Real dpre = dv[i] * (1 + tg * (1 - tp * tp));
            const Real es = std::exp(s0[i]);
            if (dparams) {
                std::size_t base = static_cast<std::size_t>(channel) * kParamsPerChannel;
                dparams[base + 2 * kWidth + i] += upstream * dv[i] * tp * (1 - tg * tg);
                dparams[base + kWidth + i] += upstream * dpre;
                dparams[base + i] += upstream * dpre * es * in0;
            }
            dy_acc += dpre * es;
        }
        if (dy) *dy = dy_acc;
        return c;
    }

    Real cdf(int channel, Real y) const { return cdf_grad(channel, y); }

    /// pmf(yhat) = max(CDF(yhat + 1/2) - CDF(yhat - 1/2), floor).
    Real pmf(int channel, Real yhat) const {
        return std::max(cdf(channel, yhat + 0.5) - cdf(channel, yhat - 0.5), kProbFloor);
    }

    /// pmf with gradients. `upstream` is dL/dpmf; accumulates into dparams
    /// (layout matching params()), writes dL/dyhat into *dy. Gradients are
    /// zero where the floor is active.
    Real pmf_grad(int channel, Real yhat, Real upstream, Real* dparams, Real* dy) const {
        Real dy_hi = 0, dy_lo = 0;
        const Real hi = cdf_grad(channel, yhat + 0.5, 0, nullptr, nullptr);
        const Real lo = cdf_grad(channel, yhat - 0.5, 0, nullptr, nullptr);
        const Real raw = hi - lo;
        if (raw <= kProbFloor) {
            if (dy) *dy = 0;
            return kProbFloor;
        }
        cdf_grad(channel, yhat + 0.5, upstream, dparams, dy ? &dy_hi : nullptr);
        cdf_grad(channel, yhat - 0.5, -upstream, dparams, dy ? &dy_lo : nullptr);
        if (dy) *dy = upstream * (dy_hi - dy_lo);
        return raw;
    }

private:
    static constexpr int kParamsPerChannel =
        3 * kWidth + (kLayers - 2) * (kWidth * kWidth + 2 * kWidth) + kWidth + 1;

    void init_channel(int ch, RandomStream& rng) {
        Real* p = params_.data() + static_cast<std::size_t>(ch) * kParamsPerChannel;
        // Biases stay zero so cdf(0) = 0.5 at init. Scales target a composed
        // slope of roughly 0.15/unit so the initial density spans tens of
        // quantization bins instead of saturating immediately.
        const Real log_scale = std::log(0.273);
        auto init_block = [&](int off, int n_scale, int n_bias, int n_gate) {
            for (int i = 0; i < n_scale; ++i) p[off + i] = log_scale + rng.uniform(-0.25, 0.25);
            for (int i = 0; i < n_gate; ++i)
                p[off + n_scale + n_bias + i] = rng.uniform(-0.1, 0.1);
        };
        int off = 0;
        init_block(off, kWidth, kWidth, kWidth);
        off += 3 * kWidth;
        for (int l = 1; l < kLayers - 1; ++l) {
            init_block(off, kWidth * kWidth, kWidth, kWidth);
            off += kWidth * kWidth + 2 * kWidth;
        }
        init_block(off, kWidth, 1, 0);
    }

    int channels_ = 0;
    std::vector<Real> params_;
};

}  // namespace jointrf
