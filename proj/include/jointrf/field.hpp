#pragma once

#include <optional>
#include <vector>

#include "jointrf/grid.hpp"
#include "jointrf/shading.hpp"

namespace jointrf {

enum class FrameKind { keyframe, residual };

/// One frame of a GOF: the keyframe owns its basis (B_1), every other frame
/// owns a residual basis (R_t). Both carry their own coefficient grid C_t.
struct FrameRepresentation {
    FrameKind kind = FrameKind::keyframe;
    MultiResBasis basis_or_residual;  // B_1 for keyframes, R_t otherwise
    FeatureGrid coeff;                // C_t
    int frame_index = 1;

    void validate(const MultiResBasis& keyframe_basis) const {
        if (kind == FrameKind::residual && !basis_or_residual.same_shape(keyframe_basis))
            throw std::invalid_argument("residual shapes must match the keyframe basis");
        if (coeff.channels != basis_or_residual.total_channels())
            throw std::invalid_argument("coefficient channels must equal basis total channels");
    }
};

/// Gradient buffers matching one frame's trainable pieces. Null entries mean
/// "frozen, don't accumulate".
struct FieldGradients {
    std::vector<std::vector<Real>>* basis_levels = nullptr;  // dL/dB or dL/dR per level
    std::vector<Real>* coeff = nullptr;
    std::vector<std::vector<Real>>* net_w = nullptr;
    std::vector<std::vector<Real>>* net_b = nullptr;
};

/// Everything the backward pass needs from one field evaluation.
struct FieldTape {
    std::vector<InterpStencil> basis_stencils;  // one per level
    InterpStencil coeff_stencil;
    std::vector<Real> basis_feat;   // per-level interp results, concatenated
    std::vector<Real> coeff_feat;
    std::vector<std::vector<Real>> acts;  // MLP activations
    Real raw_density = 0;           // pre-softplus
    std::array<Real, 3> raw_rgb{};  // pre-sigmoid
};

struct FieldSample {
    std::array<Real, 3> rgb{};
    Real density = 0;
};

/// Eq. 2 evaluation: concat per-level basis features (keyframe + residual),
/// Hadamard with the coefficient features, append the direction encoding,
/// run the shading MLP. Density through softplus, rgb through sigmoid.
inline FieldSample query_field(const FrameRepresentation& frame,
                               const MultiResBasis& keyframe_basis,
                               const ShadingNetwork& net, const Vec3& x, const Vec3& d,
                               FieldTape* tape = nullptr) {
    const bool residual = frame.kind == FrameKind::residual;
    const MultiResBasis& base = residual ? keyframe_basis : frame.basis_or_residual;
    const int total = base.total_channels();

    FieldTape local;
    FieldTape& t = tape ? *tape : local;
    t.basis_stencils.resize(base.level_count());
    t.basis_feat.assign(total, 0.0);

    int off = 0;
    for (int l = 0; l < base.level_count(); ++l) {
        const FeatureGrid& g = base.levels[l];
        t.basis_stencils[l] = interp_stencil(g, x);
        interp(g, t.basis_stencils[l], t.basis_feat.data() + off);
        if (residual) {
            // interp is linear, so interp(B1 + R) = interp(B1) + interp(R)
            const FeatureGrid& r = frame.basis_or_residual.levels[l];
            std::vector<Real> rf(r.channels);
            interp(r, t.basis_stencils[l], rf.data());
            for (int c = 0; c < r.channels; ++c) t.basis_feat[off + c] += rf[c];
        }
        off += g.channels;
    }

    t.coeff_stencil = interp_stencil(frame.coeff, x);
    t.coeff_feat.assign(frame.coeff.channels, 0.0);
    interp(frame.coeff, t.coeff_stencil, t.coeff_feat.data());

    auto enc = direction_encode(d);
    std::vector<Real> input(net.input_width());
    if (static_cast<int>(total + enc.size()) != net.input_width())
        throw std::invalid_argument("shading network input width mismatch");
    for (int c = 0; c < total; ++c) input[c] = t.basis_feat[c] * t.coeff_feat[c];
    for (std::size_t k = 0; k < enc.size(); ++k) input[total + k] = enc[k];

    net.forward(input.data(), t.acts);
    const auto& head = t.acts.back();
    t.raw_rgb = {head[0], head[1], head[2]};
    t.raw_density = head[3];

    FieldSample out;
    for (int i = 0; i < 3; ++i) out.rgb[i] = sigmoid(head[i]);
    out.density = softplus(head[3]);
    return out;
}

/// Reverse of query_field. dL/drgb and dL/ddensity in, parameter gradients
/// accumulated out. For residual frames the basis gradient lands on R_t
/// (dB_t/dR_t = 1); pass grads.basis_levels = nullptr to freeze.
inline void query_field_backward(const FrameRepresentation& frame,
                                 const MultiResBasis& keyframe_basis,
                                 const ShadingNetwork& net, const FieldTape& t,
                                 const std::array<Real, 3>& drgb, Real ddensity,
                                 const FieldGradients& grads) {
    // Output activations
    std::array<Real, 4> dhead;
    for (int i = 0; i < 3; ++i) {
        Real s = sigmoid(t.raw_rgb[i]);
        dhead[i] = drgb[i] * s * (1 - s);
    }
    dhead[3] = ddensity * sigmoid(t.raw_density);  // d softplus = sigmoid

    const bool residual = frame.kind == FrameKind::residual;
    const MultiResBasis& base = residual ? keyframe_basis : frame.basis_or_residual;
    const int total = base.total_channels();

    std::vector<Real> dinput(net.input_width());
    if (grads.net_w && grads.net_b) {
        net.backward(t.acts, dhead.data(), *grads.net_w, *grads.net_b, dinput.data());
    } else {
        net.backward_input_only(t.acts, dhead.data(), dinput.data());
    }

    // Hadamard product: dL/db = dL/dh * c, dL/dc = dL/dh * b
    if (grads.coeff) {
        std::vector<Real> dcoeff(total);
        for (int c = 0; c < total; ++c) dcoeff[c] = dinput[c] * t.basis_feat[c];
        interp_backward(frame.coeff, t.coeff_stencil, dcoeff.data(), grads.coeff->data());
    }
    if (grads.basis_levels) {
        std::vector<Real> dbasis(total);
        for (int c = 0; c < total; ++c) dbasis[c] = dinput[c] * t.coeff_feat[c];
        int off = 0;
        for (int l = 0; l < base.level_count(); ++l) {
            const FeatureGrid& g = base.levels[l];
            interp_backward(g, t.basis_stencils[l], dbasis.data() + off,
                            (*grads.basis_levels)[l].data());
            off += g.channels;
        }
    }
}

}  // namespace jointrf
