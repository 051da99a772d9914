#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace jointrf {

using Real = double;

struct Vec3 {
    Real x = 0, y = 0, z = 0;

    Vec3() = default;
    Vec3(Real x_, Real y_, Real z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(Real s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(Real s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

    Real dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Real norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const { return *this / norm(); }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    Real operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(Real s, const Vec3& v) { return v * s; }

/// Axis-aligned box mapping a grid to world space.
struct Bounds {
    Vec3 lo, hi;

    Bounds() : lo(0, 0, 0), hi(1, 1, 1) {}
    Bounds(Vec3 lo_, Vec3 hi_) : lo(lo_), hi(hi_) {
        if (!(hi.x > lo.x && hi.y > lo.y && hi.z > lo.z))
            throw std::domain_error("bounds must have positive extent on every axis");
    }

    Vec3 extent() const { return hi - lo; }

    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
               p.z >= lo.z && p.z <= hi.z;
    }

    bool operator==(const Bounds& o) const {
        return lo.x == o.lo.x && lo.y == o.lo.y && lo.z == o.lo.z &&
               hi.x == o.hi.x && hi.y == o.hi.y && hi.z == o.hi.z;
    }

    /// Slab intersection. Returns false on miss; otherwise [t0, t1] with t1 >= max(t0, 0).
    bool intersect(const Vec3& origin, const Vec3& dir, Real& t0, Real& t1) const {
        t0 = 0;
        t1 = std::numeric_limits<Real>::infinity();
        for (int a = 0; a < 3; ++a) {
            Real o = origin[a], d = dir[a], l = lo[a], h = hi[a];
            if (d == 0) {
                if (o < l || o > h) return false;
                continue;
            }
            Real ta = (l - o) / d, tb = (h - o) / d;
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
            if (t0 > t1) return false;
        }
        return true;
    }
};

/// Project-wide rounding rule: half away from zero. Encoder and decoder must agree.
inline long long round_half_away(Real v) {
    return static_cast<long long>(v >= 0 ? std::floor(v + 0.5) : std::ceil(v - 0.5));
}

/// Deterministic uniform stream (splitmix64 core). All randomness in the
/// project flows through explicitly seeded instances of this.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    Real uniform() { return static_cast<Real>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [a, b).
    Real uniform(Real a, Real b) { return a + (b - a) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /// Split off an independent child stream.
    RandomStream fork() { return RandomStream(next_u64() ^ 0xA02BDBF7BB3C0A7Aull); }

private:
    std::uint64_t state_;
};

inline Real softplus(Real x) {
    // Numerically stable: log(1 + e^x).
    return x > 30 ? x : std::log1p(std::exp(x));
}

inline Real sigmoid(Real x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace jointrf
