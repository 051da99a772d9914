#pragma once

#include "jointrf/image.hpp"
#include "jointrf/render.hpp"

namespace jointrf {

/// Full-frame render: one ray per pixel center, deterministic when jitter is
/// off. Misses keep the configured background. Pixels are independent, so the
/// loop parallelizes over rows.
inline Image render_image(const FrameRepresentation& frame, const MultiResBasis& keyframe_basis,
                          const ShadingNetwork& net, const Camera& camera,
                          const RenderConfig& cfg, std::uint64_t seed = 0, int threads = 1) {
    Image img(camera.width, camera.height);
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : 1)
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            // Per-pixel stream keeps jittered renders thread-order independent.
            RandomStream rng(seed ^ (static_cast<std::uint64_t>(y) << 24 | x));
            img.set_pixel(x, y, render_pixel(frame, keyframe_basis, net,
                                             generate_ray(camera, x, y), cfg, rng));
        }
    }
    return img;
}

}  // namespace jointrf
