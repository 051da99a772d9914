#pragma once

#include "jointrf/bitstream.hpp"
#include "jointrf/metrics.hpp"
#include "jointrf/render_image.hpp"
#include "jointrf/scene.hpp"

namespace jointrf {

struct EvalResult {
    std::vector<Real> frame_psnr;  // per-image PSNR averaged over the split's views
    std::vector<Real> frame_ssim;
    Real mean_psnr = 0;
    Real mean_ssim = 0;
};

/// Render every frame of a decoded GOF against the dataset's views of one
/// split and average metrics per image, then per frame, then overall.
/// `frame_offset` maps GOF-local frame 0 onto its dataset frame index.
inline EvalResult evaluate_gof(const GofRepresentation& decoded, const Dataset& ds,
                               const std::string& split, int samples_per_ray, int threads = 1,
                               int frame_offset = 0) {
    const auto views = ds.view_indices(split);
    if (views.empty()) throw std::invalid_argument("dataset has no '" + split + "' views");
    RenderConfig rc;
    rc.samples_per_ray = samples_per_ray;
    rc.jitter = false;
    rc.background = ds.background;

    EvalResult r;
    for (std::size_t t = 0; t < decoded.frames.size(); ++t) {
        Real p = 0, s = 0;
        for (int v : views) {
            Image rendered = render_image(decoded.frames[t], decoded.keyframe_basis(),
                                          decoded.net, ds.views[v].camera, rc, 0, threads);
            Image truth = ds.load_image(frame_offset + static_cast<int>(t), v);
            p += psnr(truth, rendered);
            s += ssim(truth, rendered);
        }
        r.frame_psnr.push_back(p / views.size());
        r.frame_ssim.push_back(s / views.size());
    }
    for (std::size_t t = 0; t < r.frame_psnr.size(); ++t) {
        r.mean_psnr += r.frame_psnr[t];
        r.mean_ssim += r.frame_ssim[t];
    }
    r.mean_psnr /= r.frame_psnr.size();
    r.mean_ssim /= r.frame_ssim.size();
    return r;
}

}  // namespace jointrf
