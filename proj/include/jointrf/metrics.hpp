#pragma once

#include <algorithm>
#include <vector>

#include "jointrf/image.hpp"

namespace jointrf {

/// 10 log10(255^2 / MSE) over all RGB bytes; identical images cap at 99 dB.
inline Real psnr(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("psnr: image dimensions differ");
    Real se = 0;
    for (std::size_t i = 0; i < a.rgb.size(); ++i) {
        const Real d = static_cast<Real>(a.rgb[i]) - static_cast<Real>(b.rgb[i]);
        se += d * d;
    }
    const Real mse = se / static_cast<Real>(a.rgb.size());
    if (mse == 0) return 99.0;
    return std::min<Real>(10.0 * std::log10(255.0 * 255.0 / mse), 99.0);
}

namespace detail {

/// Rec.601 luma on the 0..255 scale; the grayscale used by ssim().
inline std::vector<Real> to_luma(const Image& img) {
    std::vector<Real> y(static_cast<std::size_t>(img.width) * img.height);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = 0.299 * img.rgb[3 * i] + 0.587 * img.rgb[3 * i + 1] + 0.114 * img.rgb[3 * i + 2];
    return y;
}

inline std::vector<Real> gaussian_kernel(int radius, Real sigma) {
    std::vector<Real> k(2 * radius + 1);
    Real sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[i + radius];
    }
    for (Real& v : k) v /= sum;
    return k;
}

/// Separable Gaussian filter, valid region only (no padding).
inline std::vector<Real> filter_valid(const std::vector<Real>& src, int w, int h,
                                      const std::vector<Real>& kernel) {
    const int r = static_cast<int>(kernel.size()) / 2;
    const int ow = w - 2 * r, oh = h - 2 * r;
    std::vector<Real> horiz(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            Real s = 0;
            for (int i = 0; i < 2 * r + 1; ++i) s += kernel[i] * src[y * w + x + i];
            horiz[y * ow + x] = s;
        }
    std::vector<Real> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            Real s = 0;
            for (int i = 0; i < 2 * r + 1; ++i) s += kernel[i] * horiz[(y + i) * ow + x];
            out[y * ow + x] = s;
        }
    return out;
}

}  // namespace detail

/// Windowed SSIM on Rec.601 luma: 11x11 Gaussian (sigma 1.5), k1 = 0.01,
/// k2 = 0.03, mean over valid windows.
inline Real ssim(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("ssim: image dimensions differ");
    constexpr int kRadius = 5;
    if (a.width < 2 * kRadius + 1 || a.height < 2 * kRadius + 1)
        throw std::domain_error("ssim: image smaller than the 11x11 window");

    const auto ya = detail::to_luma(a);
    const auto yb = detail::to_luma(b);
    const int w = a.width, h = a.height;
    std::vector<Real> aa(ya.size()), bb(ya.size()), ab(ya.size());
    for (std::size_t i = 0; i < ya.size(); ++i) {
        aa[i] = ya[i] * ya[i];
        bb[i] = yb[i] * yb[i];
        ab[i] = ya[i] * yb[i];
    }
    const auto kernel = detail::gaussian_kernel(kRadius, 1.5);
    const auto mu_a = detail::filter_valid(ya, w, h, kernel);
    const auto mu_b = detail::filter_valid(yb, w, h, kernel);
    const auto m_aa = detail::filter_valid(aa, w, h, kernel);
    const auto m_bb = detail::filter_valid(bb, w, h, kernel);
    const auto m_ab = detail::filter_valid(ab, w, h, kernel);

    const Real c1 = (0.01 * 255) * (0.01 * 255);
    const Real c2 = (0.03 * 255) * (0.03 * 255);
    Real total = 0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const Real va = m_aa[i] - mu_a[i] * mu_a[i];
        const Real vb = m_bb[i] - mu_b[i] * mu_b[i];
        const Real cov = m_ab[i] - mu_a[i] * mu_b[i];
        total += ((2 * mu_a[i] * mu_b[i] + c1) * (2 * cov + c2)) /
                 ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
    }
    return total / static_cast<Real>(mu_a.size());
}

/// One point of a rate-distortion curve.
struct RdPoint {
    Real bytes = 0;  // total size for the label
    Real psnr = 0;
    Real ssim = 0;
    std::string label;  // typically the q value
};

namespace detail {

/// Monotone piecewise-cubic (Fritsch-Carlson) derivative estimates.
inline std::vector<Real> pchip_slopes(const std::vector<Real>& x, const std::vector<Real>& y) {
    const std::size_t n = x.size();
    std::vector<Real> h(n - 1), delta(n - 1), d(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        delta[i] = (y[i + 1] - y[i]) / h[i];
    }
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0) {
            d[i] = 0;
        } else {
            const Real w1 = 2 * h[i] + h[i - 1];
            const Real w2 = h[i] + 2 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    // Endpoint correction (3-point, clipped) as in the standard scheme.
    auto endpoint = [&](Real h0, Real h1, Real d0, Real d1) {
        Real dd = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (dd * d0 <= 0) dd = 0;
        else if (d0 * d1 <= 0 && std::abs(dd) > 3 * std::abs(d0)) dd = 3 * d0;
        return dd;
    };
    if (n > 2) {
        d[0] = endpoint(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }
    return d;
}

/// Integral of the pchip interpolant over [lo, hi] (inside the data range).
inline Real pchip_integrate(const std::vector<Real>& x, const std::vector<Real>& y, Real lo,
                            Real hi) {
    const auto d = pchip_slopes(x, y);

    // Hermite evaluation and exact segment integral.
    auto eval = [&](std::size_t i, Real t /* in [0, hseg] */) {
        const Real h = x[i + 1] - x[i];
        const Real s = t / h;
        const Real h00 = (1 + 2 * s) * (1 - s) * (1 - s);
        const Real h10 = s * (1 - s) * (1 - s);
        const Real h01 = s * s * (3 - 2 * s);
        const Real h11 = s * s * (s - 1);
        return h00 * y[i] + h10 * h * d[i] + h01 * y[i + 1] + h11 * h * d[i + 1];
    };

    Real total = 0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const Real a = std::max(lo, x[i]);
        const Real b = std::min(hi, x[i + 1]);
        if (b <= a) continue;
        if (a == x[i] && b == x[i + 1]) {
            const Real h = b - a;
            total += h * (y[i] + y[i + 1]) / 2 + h * h * (d[i] - d[i + 1]) / 12;
        } else {
            // Partial segment: Simpson is exact for cubics.
            total += (b - a) / 6 *
                     (eval(i, a - x[i]) + 4 * eval(i, (a + b) / 2 - x[i]) + eval(i, b - x[i]));
        }
    }
    return total;
}

}  // namespace detail

struct BdResult {
    Real bd_psnr = 0;  // dB, positive means curve_b sits above curve_a
    Real bdbr = 0;     // percent, negative means curve_b needs fewer bits
};

/// Bjontegaard deltas of curve_b relative to curve_a: piecewise-cubic
/// interpolation in the log-rate domain, integrated over the shared range.
inline BdResult bd_metrics(std::vector<RdPoint> curve_a, std::vector<RdPoint> curve_b) {
    for (auto* c : {&curve_a, &curve_b}) {
        if (c->size() < 4) throw std::domain_error("bd_metrics: need at least 4 points");
        std::sort(c->begin(), c->end(),
                  [](const RdPoint& p, const RdPoint& q) { return p.bytes < q.bytes; });
        for (std::size_t i = 0; i + 1 < c->size(); ++i)
            if ((*c)[i].bytes == (*c)[i + 1].bytes)
                throw std::domain_error("bd_metrics: rates must be distinct");
    }

    auto log_rates = [](const std::vector<RdPoint>& c) {
        std::vector<Real> v;
        for (const auto& p : c) v.push_back(std::log10(p.bytes));
        return v;
    };
    auto psnrs = [](const std::vector<RdPoint>& c) {
        std::vector<Real> v;
        for (const auto& p : c) v.push_back(p.psnr);
        return v;
    };

    BdResult out;
    {
        const auto xa = log_rates(curve_a), ya = psnrs(curve_a);
        const auto xb = log_rates(curve_b), yb = psnrs(curve_b);
        const Real lo = std::max(xa.front(), xb.front());
        const Real hi = std::min(xa.back(), xb.back());
        if (hi <= lo) throw std::domain_error("bd_metrics: curves have no rate overlap");
        out.bd_psnr = (detail::pchip_integrate(xb, yb, lo, hi) -
                       detail::pchip_integrate(xa, ya, lo, hi)) /
                      (hi - lo);
    }
    {
        // Swap axes: log-rate as a function of PSNR.
        auto by_psnr = [](std::vector<RdPoint> c) {
            std::sort(c.begin(), c.end(),
                      [](const RdPoint& p, const RdPoint& q) { return p.psnr < q.psnr; });
            std::vector<Real> x, y;
            for (const auto& p : c) {
                x.push_back(p.psnr);
                y.push_back(std::log10(p.bytes));
            }
            for (std::size_t i = 0; i + 1 < x.size(); ++i)
                if (x[i] == x[i + 1]) throw std::domain_error("bd_metrics: duplicate PSNR");
            return std::pair(x, y);
        };
        const auto [xa, ya] = by_psnr(curve_a);
        const auto [xb, yb] = by_psnr(curve_b);
        const Real lo = std::max(xa.front(), xb.front());
        const Real hi = std::min(xa.back(), xb.back());
        if (hi <= lo) throw std::domain_error("bd_metrics: curves have no quality overlap");
        const Real avg = (detail::pchip_integrate(xb, yb, lo, hi) -
                          detail::pchip_integrate(xa, ya, lo, hi)) /
                         (hi - lo);
        out.bdbr = (std::pow(10.0, avg) - 1.0) * 100.0;
    }
    return out;
}

}  // namespace jointrf
