#pragma once

#include <vector>

#include "jointrf/camera.hpp"
#include "jointrf/field.hpp"

namespace jointrf {

struct RayRadiance {
    std::array<Real, 3> rgb{};
    std::vector<Real> weight;  // w_i = T_i (1 - exp(-sigma_i delta_i))
};

/// Volume rendering quadrature: rgb = sum_i T_i (1 - exp(-sigma_i delta_i)) c_i
/// with T_i = exp(-sum_{j<i} sigma_j delta_j).
inline RayRadiance render_ray(const RaySamples& samples,
                              const std::vector<FieldSample>& fields) {
    const int n = static_cast<int>(samples.t.size());
    RayRadiance out;
    out.weight.assign(n, 0.0);
    Real accum = 0;  // sum of sigma_j delta_j so far
    for (int i = 0; i < n; ++i) {
        if (fields[i].density < 0) throw std::domain_error("render_ray: negative density");
        const Real trans = std::exp(-accum);
        const Real alpha = -std::expm1(-fields[i].density * samples.delta[i]);
        const Real w = trans * alpha;
        out.weight[i] = w;
        for (int k = 0; k < 3; ++k) out.rgb[k] += w * fields[i].rgb[k];
        accum += fields[i].density * samples.delta[i];
    }
    return out;
}

/// Reverse of render_ray: given dL/drgb, produce per-sample dL/dc_i and
/// dL/dsigma_i. Two-pass form: a forward sweep for T_i, a backward sweep for
/// the suffix term of the transmittance chain.
/// `background` accounts for compositing rgb + (1 - sum w) * bg; every w_i
/// then sees an extra -drgb.bg term. Zero background reduces to the plain
/// quadrature backward.
inline void render_ray_backward(const RaySamples& samples,
                                const std::vector<FieldSample>& fields,
                                const std::array<Real, 3>& drgb,
                                std::vector<std::array<Real, 3>>& dcolor,
                                std::vector<Real>& ddensity,
                                const std::array<Real, 3>& background = {0, 0, 0}) {
    const int n = static_cast<int>(samples.t.size());
    dcolor.assign(n, {0, 0, 0});
    ddensity.assign(n, 0.0);

    std::vector<Real> trans(n), alpha(n);
    Real accum = 0;
    for (int i = 0; i < n; ++i) {
        trans[i] = std::exp(-accum);
        alpha[i] = -std::expm1(-fields[i].density * samples.delta[i]);
        accum += fields[i].density * samples.delta[i];
    }

    // dL/dw_i = drgb . c_i ; w_i = T_i alpha_i.
    // sigma_i enters w_i directly and every w_j (j > i) through T_j.
    Real suffix = 0;  // sum_{j>i} dL/dw_j * w_j (since dT_j/dsigma_i = -delta_i T_j)
    for (int i = n - 1; i >= 0; --i) {
        Real dw = 0;
        for (int k = 0; k < 3; ++k) {
            dw += drgb[k] * (fields[i].rgb[k] - background[k]);
            dcolor[i][k] = drgb[k] * trans[i] * alpha[i];
        }
        ddensity[i] = samples.delta[i] * (dw * trans[i] * (1 - alpha[i]) - suffix);
        suffix += dw * trans[i] * alpha[i];
    }
}

struct RenderConfig {
    int samples_per_ray = 128;
    bool jitter = false;
    std::array<Real, 3> background{0, 0, 0};
};

struct Image;  // see image.hpp

/// Evaluate one ray against a frame: intersect bounds, sample, query, composite.
/// Rays that miss the field bounds return the background color.
inline std::array<Real, 3> render_pixel(const FrameRepresentation& frame,
                                        const MultiResBasis& keyframe_basis,
                                        const ShadingNetwork& net, Ray ray,
                                        const RenderConfig& cfg, RandomStream& rng) {
    const Bounds& b = frame.coeff.bounds;
    Real t0, t1;
    if (!b.intersect(ray.origin, ray.direction, t0, t1) || t1 <= t0)
        return cfg.background;
    ray.near = t0;
    ray.far = t1;
    RaySamples samples = sample_ray(ray, cfg.samples_per_ray, cfg.jitter, rng);
    std::vector<FieldSample> fields(samples.t.size());
    FieldTape tape;
    for (std::size_t i = 0; i < samples.t.size(); ++i)
        fields[i] = query_field(frame, keyframe_basis, net, samples.position[i],
                                ray.direction, &tape);
    RayRadiance rad = render_ray(samples, fields);
    // Composite over the background through the leftover transmittance.
    Real wsum = 0;
    for (Real w : rad.weight) wsum += w;
    std::array<Real, 3> out;
    for (int k = 0; k < 3; ++k) out[k] = rad.rgb[k] + (1 - wsum) * cfg.background[k];
    return out;
}

}  // namespace jointrf
