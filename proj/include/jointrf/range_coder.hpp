#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "jointrf/entropy_model.hpp"

namespace jointrf {

/// Cumulative symbol frequencies summing to exactly 2^16.
/// cum[s]..cum[s+1] is symbol s's slice; every symbol has count >= 1.
struct FrequencyTable {
    std::vector<std::uint32_t> cum;  // size alphabet+1; cum[0] = 0, cum.back() = 65536

    static constexpr std::uint32_t kTotal = 1u << 16;

    std::uint32_t alphabet() const { return static_cast<std::uint32_t>(cum.size()) - 1; }
    std::uint32_t count(std::uint32_t s) const { return cum[s + 1] - cum[s]; }

    /// Build from non-negative weights: floor every count at 1, distribute the
    /// remainder by largest fractional part (ties to the smaller symbol) so
    /// encoder and decoder reproduce the table bit-identically.
    static FrequencyTable from_weights(const std::vector<Real>& weights) {
        const std::size_t n = weights.size();
        if (n == 0 || n > kTotal)
            throw std::invalid_argument("frequency table alphabet must be in [1, 65536]");
        Real sum = 0;
        for (Real w : weights) sum += std::max<Real>(w, 0);
        std::vector<std::uint32_t> counts(n, 1);
        std::uint32_t budget = kTotal - static_cast<std::uint32_t>(n);
        if (sum > 0 && budget > 0) {
            std::vector<Real> frac(n);
            std::uint32_t assigned = 0;
            for (std::size_t i = 0; i < n; ++i) {
                Real share = std::max<Real>(weights[i], 0) / sum * budget;
                auto whole = static_cast<std::uint32_t>(share);
                counts[i] += whole;
                frac[i] = share - whole;
                assigned += whole;
            }
            // Largest remainder; ties broken toward the smaller symbol index.
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
            for (std::uint32_t k = 0; k < budget - assigned; ++k) counts[order[k % n]] += 1;
        } else if (budget > 0) {
            // Degenerate weights: spread uniformly.
            for (std::uint32_t k = 0; k < budget; ++k) counts[k % n] += 1;
        }
        FrequencyTable t;
        t.cum.resize(n + 1);
        t.cum[0] = 0;
        for (std::size_t i = 0; i < n; ++i) t.cum[i + 1] = t.cum[i] + counts[i];
        return t;
    }
};

/// Table for coding one channel of a quantized grid: counts proportional to
/// the entropy model's pmf at k + min_q for k in [0, S).
inline FrequencyTable build_freq_table(const EntropyModel& model, int channel,
                                       std::uint32_t alphabet, std::int64_t min_q) {
    if (alphabet < 1) throw std::invalid_argument("build_freq_table: empty alphabet");
    std::vector<Real> w(alphabet);
    for (std::uint32_t k = 0; k < alphabet; ++k)
        w[k] = model.pmf(channel, static_cast<Real>(static_cast<std::int64_t>(k) + min_q));
    return FrequencyTable::from_weights(w);
}

/// Byte-oriented range encoder, 32-bit range with explicit carry propagation
/// (cache + pending-0xFF counter). Total frequency fixed at 2^16.
class RangeEncoder {
public:
    void encode(std::uint32_t cum, std::uint32_t freq) {
        range_ /= FrequencyTable::kTotal;
        low_ += static_cast<std::uint64_t>(cum) * range_;
        range_ *= freq;
        while (range_ < kTopValue) {
            shift_low();
            range_ <<= 8;
        }
    }

    void encode_symbol(const FrequencyTable& t, std::uint32_t s) {
        encode(t.cum[s], t.count(s));
    }

    /// Flush remaining state; the stream always ends with 5 tail bytes.
    std::vector<std::uint8_t> finish() {
        for (int i = 0; i < 5; ++i) shift_low();
        return std::move(out_);
    }

private:
    static constexpr std::uint32_t kTopValue = 1u << 24;

    void shift_low() {
        if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
            const auto carry = static_cast<std::uint8_t>(low_ >> 32);
            if (started_) out_.push_back(cache_ + carry);
            for (; pending_ > 0; --pending_) out_.push_back(static_cast<std::uint8_t>(0xFF + carry));
            cache_ = static_cast<std::uint8_t>(low_ >> 24);
            started_ = true;
        } else {
            ++pending_;
        }
        low_ = (low_ << 8) & 0xFFFFFFFFull;
    }

    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint8_t cache_ = 0;
    std::uint64_t pending_ = 0;
    bool started_ = false;
    std::vector<std::uint8_t> out_;
};

class RangeDecoder {
public:
    explicit RangeDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
        for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
    }

    /// Cumulative-frequency slot of the next symbol; pair with consume().
    std::uint32_t decode_target() {
        range_ /= FrequencyTable::kTotal;
        std::uint32_t t = static_cast<std::uint32_t>(code_ / range_);
        return std::min(t, FrequencyTable::kTotal - 1);
    }

    void consume(std::uint32_t cum, std::uint32_t freq) {
        code_ -= static_cast<std::uint64_t>(cum) * range_;
        range_ *= freq;
        while (range_ < kTopValue) {
            code_ = (code_ << 8) | next_byte();
            range_ <<= 8;
        }
    }

    std::uint32_t decode_symbol(const FrequencyTable& t) {
        const std::uint32_t target = decode_target();
        // Binary search the cumulative table.
        std::uint32_t lo = 0, hi = t.alphabet() - 1;
        while (lo < hi) {
            std::uint32_t mid = (lo + hi + 1) / 2;
            if (t.cum[mid] <= target) lo = mid; else hi = mid - 1;
        }
        consume(t.cum[lo], t.count(lo));
        return lo;
    }

private:
    static constexpr std::uint32_t kTopValue = 1u << 24;

    std::uint8_t next_byte() {
        if (pos_ < bytes_.size()) return bytes_[pos_++];
        ++overrun_;
        if (overrun_ > 8) throw std::runtime_error("range decoder: truncated stream");
        return 0;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    int overrun_ = 0;
    std::uint64_t code_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
};

/// Whole-sequence helpers; `tables` is indexed per symbol position modulo its
/// size, which covers the per-channel interleaved layout of grid data.
inline std::vector<std::uint8_t> range_encode(std::span<const std::uint32_t> symbols,
                                              const std::vector<FrequencyTable>& tables) {
    RangeEncoder enc;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const FrequencyTable& t = tables[i % tables.size()];
        if (symbols[i] >= t.alphabet())
            throw std::range_error("range_encode: symbol outside table alphabet");
        enc.encode_symbol(t, symbols[i]);
    }
    return enc.finish();
}

inline std::vector<std::uint32_t> range_decode(std::span<const std::uint8_t> bytes,
                                               const std::vector<FrequencyTable>& tables,
                                               std::size_t count) {
    RangeDecoder dec(bytes);
    std::vector<std::uint32_t> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = dec.decode_symbol(tables[i % tables.size()]);
    return out;
}

}  // namespace jointrf
