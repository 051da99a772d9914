#pragma once

#include <cstddef>
#include <vector>

#include "jointrf/core.hpp"

namespace jointrf {

/// Dense 3D lattice of feature vectors. Storage is x-major:
/// data[((ix * ny + iy) * nz + iz) * channels + c].
struct FeatureGrid {
    int nx = 0, ny = 0, nz = 0;
    int channels = 0;
    std::vector<Real> data;
    Bounds bounds;

    FeatureGrid() = default;
    FeatureGrid(int nx_, int ny_, int nz_, int channels_, Bounds b = Bounds())
        : nx(nx_), ny(ny_), nz(nz_), channels(channels_), bounds(b) {
        if (nx < 1 || ny < 1 || nz < 1 || channels < 1)
            throw std::invalid_argument("grid dimensions and channels must be positive");
        data.assign(static_cast<std::size_t>(nx) * ny * nz * channels, 0.0);
    }

    std::size_t size() const { return data.size(); }
    std::size_t cell_count() const { return static_cast<std::size_t>(nx) * ny * nz; }

    std::size_t index(int ix, int iy, int iz, int c) const {
        return ((static_cast<std::size_t>(ix) * ny + iy) * nz + iz) * channels + c;
    }

    Real& at(int ix, int iy, int iz, int c) { return data[index(ix, iy, iz, c)]; }
    Real at(int ix, int iy, int iz, int c) const { return data[index(ix, iy, iz, c)]; }

    bool same_shape(const FeatureGrid& o) const {
        return nx == o.nx && ny == o.ny && nz == o.nz && channels == o.channels &&
               bounds == o.bounds;
    }

    void fill_uniform(RandomStream& rng, Real lo, Real hi) {
        for (Real& v : data) v = rng.uniform(lo, hi);
    }
};

/// Trilinear interpolation stencil for one query point: the 8 surrounding
/// lattice cells and their weights. Reused by the forward pass and by
/// gradient scatter (interp is linear in the grid entries, so the stencil
/// IS the gradient).
struct InterpStencil {
    std::array<std::size_t, 8> cell;  // cell-major offsets (multiply by channels)
    std::array<Real, 8> weight;
};

inline InterpStencil interp_stencil(const FeatureGrid& g, const Vec3& x) {
    if (!g.bounds.contains(x))
        throw std::domain_error("interp: point outside grid bounds");

    Vec3 ext = g.bounds.extent();
    // Normalized coordinates scaled so lattice nodes sit at integers 0..n-1.
    Real fx = (x.x - g.bounds.lo.x) / ext.x * (g.nx - 1);
    Real fy = (x.y - g.bounds.lo.y) / ext.y * (g.ny - 1);
    Real fz = (x.z - g.bounds.lo.z) / ext.z * (g.nz - 1);

    auto split = [](Real f, int n, int& i, Real& t) {
        i = static_cast<int>(std::floor(f));
        if (i >= n - 1) i = n - 2;  // clamp upper boundary into the last cell
        if (i < 0) i = 0;
        t = f - i;
    };
    int ix, iy, iz;
    Real tx, ty, tz;
    if (g.nx > 1) split(fx, g.nx, ix, tx); else { ix = 0; tx = 0; }
    if (g.ny > 1) split(fy, g.ny, iy, ty); else { iy = 0; ty = 0; }
    if (g.nz > 1) split(fz, g.nz, iz, tz); else { iz = 0; tz = 0; }

    int ix1 = g.nx > 1 ? ix + 1 : ix;
    int iy1 = g.ny > 1 ? iy + 1 : iy;
    int iz1 = g.nz > 1 ? iz + 1 : iz;

    auto cell = [&](int a, int b, int c) {
        return (static_cast<std::size_t>(a) * g.ny + b) * g.nz + c;
    };

    InterpStencil s;
    s.cell = {cell(ix, iy, iz),   cell(ix, iy, iz1),  cell(ix, iy1, iz),  cell(ix, iy1, iz1),
              cell(ix1, iy, iz),  cell(ix1, iy, iz1), cell(ix1, iy1, iz), cell(ix1, iy1, iz1)};
    s.weight = {(1 - tx) * (1 - ty) * (1 - tz), (1 - tx) * (1 - ty) * tz,
                (1 - tx) * ty * (1 - tz),       (1 - tx) * ty * tz,
                tx * (1 - ty) * (1 - tz),       tx * (1 - ty) * tz,
                tx * ty * (1 - tz),             tx * ty * tz};
    return s;
}

/// Trilinear interpolation of the 8 surrounding lattice features.
/// Writes `g.channels` values to `out`.
inline void interp(const FeatureGrid& g, const InterpStencil& s, Real* out) {
    for (int c = 0; c < g.channels; ++c) out[c] = 0;
    for (int k = 0; k < 8; ++k) {
        const Real w = s.weight[k];
        const Real* src = g.data.data() + s.cell[k] * g.channels;
        for (int c = 0; c < g.channels; ++c) out[c] += w * src[c];
    }
}

inline std::vector<Real> interp(const FeatureGrid& g, const Vec3& x) {
    std::vector<Real> out(g.channels);
    interp(g, interp_stencil(g, x), out.data());
    return out;
}

/// Scatter dL/dfeature back to dL/dgrid through the same stencil.
inline void interp_backward(const FeatureGrid& g, const InterpStencil& s,
                            const Real* dout, Real* grad_grid) {
    for (int k = 0; k < 8; ++k) {
        const Real w = s.weight[k];
        Real* dst = grad_grid + s.cell[k] * g.channels;
        for (int c = 0; c < g.channels; ++c) dst[c] += w * dout[c];
    }
}

/// Ordered list of basis grids at strictly increasing resolutions, all
/// sharing one bounding box. Shape also used for the residual grids.
struct MultiResBasis {
    std::vector<FeatureGrid> levels;

    MultiResBasis() = default;
    explicit MultiResBasis(std::vector<FeatureGrid> lv) : levels(std::move(lv)) {
        validate();
    }

    void validate() const {
        if (levels.empty()) throw std::invalid_argument("basis needs at least one level");
        for (std::size_t i = 1; i < levels.size(); ++i) {
            if (!(levels[i].bounds == levels[0].bounds))
                throw std::invalid_argument("basis levels must share bounds");
            if (levels[i].cell_count() <= levels[i - 1].cell_count())
                throw std::invalid_argument("basis resolutions must strictly increase");
        }
    }

    int level_count() const { return static_cast<int>(levels.size()); }

    int total_channels() const {
        int n = 0;
        for (const auto& l : levels) n += l.channels;
        return n;
    }

    bool same_shape(const MultiResBasis& o) const {
        if (levels.size() != o.levels.size()) return false;
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (!levels[i].same_shape(o.levels[i])) return false;
        return true;
    }
};

/// B_t = B_1 + R_t, element-wise per level. Pure; inputs untouched.
inline MultiResBasis compose_basis(const MultiResBasis& keyframe_basis,
                                   const MultiResBasis& residual) {
    if (!keyframe_basis.same_shape(residual))
        throw std::invalid_argument("compose_basis: level shapes differ");
    MultiResBasis out = keyframe_basis;
    for (std::size_t l = 0; l < out.levels.size(); ++l) {
        const auto& r = residual.levels[l].data;
        auto& d = out.levels[l].data;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += r[i];
    }
    return out;
}

}  // namespace jointrf
