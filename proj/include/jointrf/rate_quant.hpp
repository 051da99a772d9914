#pragma once

#include <span>
#include <vector>

#include "jointrf/entropy_model.hpp"
#include "jointrf/grid.hpp"

namespace jointrf {

struct QuantConfig {
    Real q = 10;

    explicit QuantConfig(Real q_ = 10) : q(q_) {
        if (!(q > 0)) throw std::domain_error("quantization parameter must be positive");
    }
};

/// Training-time quantization surrogate: (q x + u) / q with u ~ U(-1/2, 1/2)
/// per element. The rounding it stands in for happens in the q-scaled domain,
/// so the noise amplitude in the original domain is 1/(2q). Gradient w.r.t. x
/// is identity.
inline std::vector<Real> simulate_quantize(std::span<const Real> x, const QuantConfig& cfg,
                                           RandomStream& rng) {
    std::vector<Real> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = (cfg.q * x[i] + rng.uniform(-0.5, 0.5)) / cfg.q;
    return out;
}

/// In-place variant used by the trainer's per-iteration grid copies.
inline void simulate_quantize_inplace(std::vector<Real>& x, const QuantConfig& cfg,
                                      RandomStream& rng) {
    for (Real& v : x) v = (cfg.q * v + rng.uniform(-0.5, 0.5)) / cfg.q;
}

struct RateLoss {
    Real residual_bits = 0;  // -mean log2 pmf over all residual/basis elements
    Real coeff_bits = 0;     // -mean log2 pmf over all coefficient elements
    Real total() const { return residual_bits + coeff_bits; }
};

namespace detail {

/// One grid's worth of the rate sum: adds -log2 pmf per element and, when
/// grads are requested, d(-sum log2 pmf)/d(value) and /d(model params).
/// Values are in the q-scaled domain. Returns the element count.
inline std::size_t rate_sum_grid(const FeatureGrid& values_scaled, const EntropyModel& model,
                                 Real& bits, Real scale /* applied to grads */,
                                 std::vector<Real>* dvalues, std::vector<Real>* dmodel) {
    if (values_scaled.channels != model.channels())
        throw std::invalid_argument("rate_loss: grid channels do not match entropy model");
    constexpr Real inv_ln2 = 1.4426950408889634;
    const std::size_t cells = values_scaled.cell_count();
    for (std::size_t cell = 0; cell < cells; ++cell) {
        for (int c = 0; c < values_scaled.channels; ++c) {
            const std::size_t idx = cell * values_scaled.channels + c;
            const Real y = values_scaled.data[idx];
            if (!dvalues && !dmodel) {
                bits += -std::log2(model.pmf(c, y));
                continue;
            }
            // d(-log2 p)/dp = -1/(p ln 2); fold the outer scale in as upstream.
            Real dy = 0;
            Real p = model.pmf(c, y);
            const Real upstream = -scale * inv_ln2 / p;
            p = model.pmf_grad(c, y, upstream, dmodel ? dmodel->data() : nullptr,
                               dvalues ? &dy : nullptr);
            p = std::max(p, EntropyModel::kProbFloor);
            bits += -std::log2(p);
            if (dvalues) (*dvalues)[idx] += dy;
        }
    }
    return values_scaled.size();
}

}  // namespace detail

/// Eq.-style rate estimate: bits per element of the (simulated-)quantized
/// residual levels under their per-level models plus bits per element of the
/// quantized coefficients under the coefficient model. All values in the
/// q-scaled domain. Optional gradient outputs parallel the inputs.
inline RateLoss rate_loss(const std::vector<FeatureGrid>& residual_scaled,
                          const FeatureGrid& coeff_scaled,
                          const std::vector<EntropyModel>& basis_models,
                          const EntropyModel& coeff_model,
                          std::vector<std::vector<Real>>* dresidual = nullptr,
                          std::vector<Real>* dcoeff = nullptr,
                          std::vector<std::vector<Real>>* dbasis_models = nullptr,
                          std::vector<Real>* dcoeff_model = nullptr) {
    if (residual_scaled.size() != basis_models.size())
        throw std::invalid_argument("rate_loss: level count does not match basis model count");

    RateLoss out;
    std::size_t n_res = 0;
    for (const auto& g : residual_scaled) n_res += g.size();
    if (n_res > 0) {
        Real bits = 0;
        const Real scale = 1.0 / static_cast<Real>(n_res);
        for (std::size_t l = 0; l < residual_scaled.size(); ++l)
            detail::rate_sum_grid(residual_scaled[l], basis_models[l], bits, scale,
                                  dresidual ? &(*dresidual)[l] : nullptr,
                                  dbasis_models ? &(*dbasis_models)[l] : nullptr);
        out.residual_bits = bits * scale;
    }
    {
        Real bits = 0;
        const Real scale = 1.0 / static_cast<Real>(coeff_scaled.size());
        detail::rate_sum_grid(coeff_scaled, coeff_model, bits, scale, dcoeff, dcoeff_model);
        out.coeff_bits = bits * scale;
    }
    return out;
}

/// Maximum-likelihood fit of an entropy model to fixed q-scaled samples
/// (gradient descent on mean -log2 pmf with Adam). Used when compression is
/// not in the training loop and models must be fitted after the fact, and by
/// calibration tests against known sources.
/// `samples` are channel-interleaved like grid data.
inline Real fit_entropy_model(EntropyModel& model, std::span<const Real> samples, int iters,
                              Real lr, std::size_t batch, RandomStream& rng) {
    if (samples.empty()) return 0;
    if (samples.size() % model.channels() != 0)
        throw std::invalid_argument("fit_entropy_model: sample count not channel-aligned");
    constexpr Real inv_ln2 = 1.4426950408889634;
    struct {
        std::vector<Real> m, v;
        long step = 0;
    } st;
    st.m.assign(model.params().size(), 0.0);
    st.v.assign(model.params().size(), 0.0);
    std::vector<Real> grad(model.params().size());
    Real bits = 0;
    for (int it = 0; it < iters; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        const std::size_t n = (batch == 0 || batch >= samples.size()) ? samples.size() : batch;
        bits = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t idx = (n == samples.size()) ? k : rng.below(samples.size());
            const int c = static_cast<int>(idx % model.channels());
            const Real p = model.pmf(c, samples[idx]);
            bits += -std::log2(p);
            model.pmf_grad(c, samples[idx], -inv_ln2 / (p * static_cast<Real>(n)), grad.data(),
                           nullptr);
        }
        bits /= static_cast<Real>(n);
        st.step += 1;
        const Real bc1 = 1 - std::pow(0.9, static_cast<Real>(st.step));
        const Real bc2 = 1 - std::pow(0.999, static_cast<Real>(st.step));
        auto& p = model.params();
        for (std::size_t i = 0; i < p.size(); ++i) {
            st.m[i] = 0.9 * st.m[i] + 0.1 * grad[i];
            st.v[i] = 0.999 * st.v[i] + 0.001 * grad[i] * grad[i];
            p[i] -= lr * (st.m[i] / bc1) / (std::sqrt(st.v[i] / bc2) + 1e-8);
        }
    }
    return bits;  // last-iteration mean bits/sample
}

}  // namespace jointrf
