#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "jointrf/grid.hpp"
#include "jointrf/rate_quant.hpp"

namespace jointrf {

inline constexpr std::uint32_t kMaxAlphabet = 1u << 16;

/// Non-negative integer form of a grid: symbols = round(q x) - round(q min(x)).
struct QuantizedGrid {
    int nx = 0, ny = 0, nz = 0, channels = 0;
    Bounds bounds;
    Real q = 1;
    std::int64_t min_q = 0;  // round(q * min(x))
    std::vector<std::uint32_t> symbols;

    std::uint32_t alphabet_size() const {
        std::uint32_t m = 0;
        for (std::uint32_t s : symbols) m = std::max(m, s);
        return m + 1;
    }
};

inline QuantizedGrid quantize_grid(const FeatureGrid& x, const QuantConfig& cfg) {
    QuantizedGrid g;
    g.nx = x.nx; g.ny = x.ny; g.nz = x.nz; g.channels = x.channels;
    g.bounds = x.bounds;
    g.q = cfg.q;

    Real mn = x.data.empty() ? 0 : *std::min_element(x.data.begin(), x.data.end());
    g.min_q = round_half_away(cfg.q * mn);
    g.symbols.resize(x.data.size());
    std::int64_t max_sym = 0;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        std::int64_t s = round_half_away(cfg.q * x.data[i]) - g.min_q;
        g.symbols[i] = static_cast<std::uint32_t>(s);
        max_sym = std::max(max_sym, s);
    }
    if (max_sym + 1 > static_cast<std::int64_t>(kMaxAlphabet))
        throw std::range_error("quantize_grid: alphabet of " + std::to_string(max_sym + 1) +
                               " symbols exceeds the configured maximum of " +
                               std::to_string(kMaxAlphabet) + "; lower q or rescale features");
    return g;
}

inline FeatureGrid dequantize_grid(const QuantizedGrid& g) {
    FeatureGrid x(g.nx, g.ny, g.nz, g.channels, g.bounds);
    for (std::size_t i = 0; i < g.symbols.size(); ++i)
        x.data[i] = static_cast<Real>(static_cast<std::int64_t>(g.symbols[i]) + g.min_q) / g.q;
    return x;
}

}  // namespace jointrf
