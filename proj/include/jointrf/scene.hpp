#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "jointrf/camera.hpp"
#include "jointrf/image.hpp"
#include "jointrf/render.hpp"

namespace jointrf {

/// Analytic animated primitive: a constant-density diffuse sphere or box
/// whose center moves along a per-frame linear path.
struct Primitive {
    enum class Kind { sphere, box } kind = Kind::sphere;
    Vec3 center{0, 0, 0};
    Vec3 velocity{0, 0, 0};  // units per frame
    Real radius = 0.2;       // sphere radius
    Vec3 half_extent{0.2, 0.2, 0.2};  // box
    std::array<Real, 3> color{1, 1, 1};
    Real density = 20;

    Vec3 center_at(int frame) const { return center + velocity * static_cast<Real>(frame); }

    bool inside(const Vec3& p, int frame) const {
        const Vec3 c = center_at(frame);
        if (kind == Kind::sphere) return (p - c).norm() <= radius;
        return std::abs(p.x - c.x) <= half_extent.x && std::abs(p.y - c.y) <= half_extent.y &&
               std::abs(p.z - c.z) <= half_extent.z;
    }
};

struct SyntheticScene {
    std::vector<Primitive> primitives;
    int frame_count = 1;
    Bounds bounds;
    std::array<Real, 3> background{0, 0, 0};

    void validate() const {
        for (const auto& p : primitives) {
            for (int k = 0; k < 3; ++k)
                if (p.color[k] < 0 || p.color[k] > 1)
                    throw std::invalid_argument("primitive colors must be in [0,1]");
            for (int f = 0; f < frame_count; ++f) {
                const Vec3 c = p.center_at(f);
                const Real r = p.kind == Primitive::Kind::sphere
                                   ? p.radius
                                   : std::max({p.half_extent.x, p.half_extent.y, p.half_extent.z});
                const Vec3 pad{r, r, r};
                if (!bounds.contains(c - pad) || !bounds.contains(c + pad))
                    throw std::invalid_argument("primitive leaves scene bounds at frame " +
                                                std::to_string(f));
            }
        }
    }

    /// Analytic field lookup: density and color at a point (first hit wins).
    FieldSample sample(const Vec3& p, int frame) const {
        for (const auto& prim : primitives)
            if (prim.inside(p, frame)) return {prim.color, prim.density};
        return {{0, 0, 0}, 0};
    }
};

/// Ground-truth render of one pixel using the same quadrature the learned
/// renderer uses, against the analytic fields.
inline std::array<Real, 3> render_scene_pixel(const SyntheticScene& scene, int frame, Ray ray,
                                              int samples_per_ray) {
    Real t0, t1;
    if (!scene.bounds.intersect(ray.origin, ray.direction, t0, t1) || t1 <= t0)
        return scene.background;
    ray.near = t0;
    ray.far = t1;
    RandomStream unused(0);
    RaySamples s = sample_ray(ray, samples_per_ray, false, unused);
    std::vector<FieldSample> fields(s.t.size());
    for (std::size_t i = 0; i < s.t.size(); ++i) fields[i] = scene.sample(s.position[i], frame);
    RayRadiance rad = render_ray(s, fields);
    Real wsum = 0;
    for (Real w : rad.weight) wsum += w;
    std::array<Real, 3> out;
    for (int k = 0; k < 3; ++k) out[k] = rad.rgb[k] + (1 - wsum) * scene.background[k];
    return out;
}

inline Image render_scene_image(const SyntheticScene& scene, int frame, const Camera& cam,
                                int samples_per_ray) {
    Image img(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x)
            img.set_pixel(x, y, render_scene_pixel(scene, frame, generate_ray(cam, x, y),
                                                   samples_per_ray));
    return img;
}

struct DatasetView {
    Camera camera;
    std::string split;  // "train" or "test"
};

/// Posed-image dataset: fixed camera rig, per-frame image file per camera.
struct Dataset {
    int width = 0, height = 0;
    int frame_count = 0;
    Bounds bounds;
    std::array<Real, 3> background{0, 0, 0};
    std::vector<DatasetView> views;
    std::vector<std::vector<std::string>> images;  // [frame][view] paths, manifest-relative
    std::filesystem::path root;

    std::vector<int> view_indices(const std::string& split) const {
        std::vector<int> idx;
        for (std::size_t i = 0; i < views.size(); ++i)
            if (views[i].split == split) idx.push_back(static_cast<int>(i));
        return idx;
    }

    Image load_image(int frame, int view) const {
        return read_png((root / images.at(frame).at(view)).string());
    }
};

/// Cameras on a sphere of the given radius, all looking at the target point.
/// Deterministic Fibonacci spiral so any count gives decent coverage.
inline std::vector<Camera> orbit_cameras(int count, Real radius, const Vec3& target, int width,
                                         int height, Real focal_px) {
    std::vector<Camera> cams;
    const Real golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        // Latitude band [-0.6, 0.6] avoids degenerate pole views.
        const Real z = -0.6 + 1.2 * (i + 0.5) / count;
        const Real r = std::sqrt(1 - z * z);
        const Real phi = golden * i;
        Vec3 pos = target + radius * Vec3{r * std::cos(phi), z, r * std::sin(phi)};

        Vec3 fwd = (target - pos).normalized();
        Vec3 world_up{0, 1, 0};
        Vec3 right = fwd.cross(world_up).normalized();
        Vec3 down = fwd.cross(right);  // camera y axis points down in image space

        Camera cam;
        cam.fx = cam.fy = focal_px;
        cam.cx = width / 2.0;
        cam.cy = height / 2.0;
        cam.width = width;
        cam.height = height;
        cam.pose.translation = pos;
        for (int k = 0; k < 3; ++k) {
            cam.pose.rotation[k][0] = right[k];
            cam.pose.rotation[k][1] = down[k];
            cam.pose.rotation[k][2] = fwd[k];
        }
        cam.validate();
        cams.push_back(cam);
    }
    return cams;
}

inline nlohmann::json pose_to_json(const Pose& p) {
    // 4x4 row-major world-from-camera matrix.
    nlohmann::json full = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) full.push_back(p.rotation[i][j]);
        full.push_back(p.translation[i]);
    }
    for (Real v : {0.0, 0.0, 0.0, 1.0}) full.push_back(v);
    return full;
}

inline Pose pose_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 16) throw std::runtime_error("pose must be a 4x4 matrix");
    Pose p;
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) p.rotation[i][k] = j[i * 4 + k].get<Real>();
    }
    p.translation = {j[3].get<Real>(), j[7].get<Real>(), j[11].get<Real>()};
    return p;
}

inline void save_manifest(const Dataset& ds, const std::filesystem::path& path) {
    nlohmann::json j;
    j["width"] = ds.width;
    j["height"] = ds.height;
    j["frames"] = ds.frame_count;
    j["bounds"] = {{"lo", {ds.bounds.lo.x, ds.bounds.lo.y, ds.bounds.lo.z}},
                   {"hi", {ds.bounds.hi.x, ds.bounds.hi.y, ds.bounds.hi.z}}};
    j["background"] = ds.background;
    j["cameras"] = nlohmann::json::array();
    for (const auto& v : ds.views)
        j["cameras"].push_back({{"fx", v.camera.fx},
                                {"fy", v.camera.fy},
                                {"cx", v.camera.cx},
                                {"cy", v.camera.cy},
                                {"pose", pose_to_json(v.camera.pose)},
                                {"split", v.split}});
    j["images"] = ds.images;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << j.dump(2) << "\n";
}

inline Dataset load_manifest(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    nlohmann::json j;
    f >> j;
    Dataset ds;
    ds.root = path.parent_path();
    ds.width = j.at("width").get<int>();
    ds.height = j.at("height").get<int>();
    ds.frame_count = j.at("frames").get<int>();
    auto lo = j.at("bounds").at("lo");
    auto hi = j.at("bounds").at("hi");
    ds.bounds = Bounds({lo[0], lo[1], lo[2]}, {hi[0], hi[1], hi[2]});
    if (j.contains("background"))
        for (int k = 0; k < 3; ++k) ds.background[k] = j["background"][k].get<Real>();
    for (const auto& c : j.at("cameras")) {
        DatasetView v;
        v.camera.fx = c.at("fx").get<Real>();
        v.camera.fy = c.at("fy").get<Real>();
        v.camera.cx = c.at("cx").get<Real>();
        v.camera.cy = c.at("cy").get<Real>();
        v.camera.width = ds.width;
        v.camera.height = ds.height;
        v.camera.pose = pose_from_json(c.at("pose"));
        v.camera.validate();
        v.split = c.at("split").get<std::string>();
        ds.views.push_back(v);
    }
    ds.images = j.at("images").get<std::vector<std::vector<std::string>>>();
    for (const auto& frame : ds.images)
        for (const auto& img : frame)
            if (!std::filesystem::exists(ds.root / img))
                throw std::runtime_error("dataset image missing: " + img);
    return ds;
}

/// Ray-trace the scene into a posed dataset on disk: PNG per (frame, camera)
/// plus a JSON manifest. Deterministic.
inline Dataset generate_scene(const SyntheticScene& scene, const std::vector<Camera>& train,
                              const std::vector<Camera>& test,
                              const std::filesystem::path& out_dir, int samples_per_ray = 256) {
    scene.validate();
    std::filesystem::create_directories(out_dir);
    Dataset ds;
    ds.width = train.at(0).width;
    ds.height = train.at(0).height;
    ds.frame_count = scene.frame_count;
    ds.bounds = scene.bounds;
    ds.background = scene.background;
    ds.root = out_dir;
    for (const auto& c : train) ds.views.push_back({c, "train"});
    for (const auto& c : test) ds.views.push_back({c, "test"});

    for (int f = 0; f < scene.frame_count; ++f) {
        std::vector<std::string> row;
        for (std::size_t v = 0; v < ds.views.size(); ++v) {
            Image img = render_scene_image(scene, f, ds.views[v].camera, samples_per_ray);
            std::string name =
                "frame" + std::to_string(f) + "_cam" + std::to_string(v) + ".png";
            write_png(img, (out_dir / name).string());
            row.push_back(name);
        }
        ds.images.push_back(row);
    }
    save_manifest(ds, out_dir / "manifest.json");
    return ds;
}

}  // namespace jointrf
