#pragma once

#include <vector>

#include "jointrf/core.hpp"

namespace jointrf {

/// World-from-camera rigid transform, row vectors R applied as R * v.
struct Pose {
    std::array<std::array<Real, 3>, 3> rotation{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    Vec3 translation{0, 0, 0};

    Vec3 rotate(const Vec3& v) const {
        return {rotation[0][0] * v.x + rotation[0][1] * v.y + rotation[0][2] * v.z,
                rotation[1][0] * v.x + rotation[1][1] * v.y + rotation[1][2] * v.z,
                rotation[2][0] * v.x + rotation[2][1] * v.y + rotation[2][2] * v.z};
    }

    Vec3 apply(const Vec3& v) const { return rotate(v) + translation; }

    bool rotation_orthonormal(Real tol = 1e-6) const {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                Real dot = 0;
                for (int k = 0; k < 3; ++k) dot += rotation[i][k] * rotation[j][k];
                if (std::abs(dot - (i == j ? 1.0 : 0.0)) > tol) return false;
            }
        return true;
    }
};

/// Pinhole camera. Convention: camera looks down +z in camera space,
/// x right, y down (image-style axes).
struct Camera {
    Real fx = 0, fy = 0;  // focal lengths, pixels
    Real cx = 0, cy = 0;  // principal point, pixels
    int width = 0, height = 0;
    Pose pose;  // world from camera

    void validate() const {
        if (fx <= 0 || fy <= 0) throw std::domain_error("focal lengths must be positive");
        if (width < 1 || height < 1) throw std::domain_error("image size must be positive");
        if (!pose.rotation_orthonormal())
            throw std::domain_error("camera rotation must be orthonormal");
    }
};

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit
    Real near = 0, far = 0;
};

/// Back-project pixel centers through the pinhole. Deterministic.
inline Ray generate_ray(const Camera& cam, Real px, Real py) {
    if (px < 0 || px >= cam.width || py < 0 || py >= cam.height)
        throw std::domain_error("generate_ray: pixel outside image bounds");
    // Pixel (i, j) center is (i + 0.5, j + 0.5)
    Vec3 dir_cam{(px + 0.5 - cam.cx) / cam.fx, (py + 0.5 - cam.cy) / cam.fy, 1.0};
    Ray r;
    r.direction = cam.pose.rotate(dir_cam).normalized();
    r.origin = cam.pose.translation;
    return r;
}

inline std::vector<Ray> generate_rays(const Camera& cam,
                                      const std::vector<std::pair<int, int>>& pixels) {
    std::vector<Ray> out;
    out.reserve(pixels.size());
    for (auto [px, py] : pixels) out.push_back(generate_ray(cam, px, py));
    return out;
}

/// Per-ray sample positions and spacings along [near, far].
struct RaySamples {
    std::vector<Real> t;      // distances from origin, ordered
    std::vector<Real> delta;  // spacing; last bin closed by the far clip
    std::vector<Vec3> position;
};

/// n stratified bins on [near, far]; jitter draws a uniform position per bin
/// from the supplied stream, otherwise bin centers.
inline RaySamples sample_ray(const Ray& ray, int n, bool jitter, RandomStream& rng) {
    if (n < 1) throw std::domain_error("sample_ray: need at least one sample");
    if (std::abs(ray.direction.norm() - 1.0) > 1e-6)
        throw std::domain_error("sample_ray: ray direction must be unit length");
    RaySamples s;
    s.t.resize(n);
    s.delta.resize(n);
    s.position.resize(n);
    const Real bin = (ray.far - ray.near) / n;
    for (int i = 0; i < n; ++i) {
        Real u = jitter ? rng.uniform() : 0.5;
        s.t[i] = ray.near + (i + u) * bin;
    }
    for (int i = 0; i + 1 < n; ++i) s.delta[i] = s.t[i + 1] - s.t[i];
    // Last spacing closes the interval at the far clip; together with the
    // lead-in this makes the spacings sum to exactly far - near.
    s.delta[n - 1] = (ray.far - s.t[n - 1]) + (s.t[0] - ray.near);
    for (int i = 0; i < n; ++i) s.position[i] = ray.origin + ray.direction * s.t[i];
    return s;
}

}  // namespace jointrf
