#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "jointrf/core.hpp"

namespace jointrf {

/// CRC-32 (IEEE, reflected) over a byte span.
inline std::uint32_t crc32(std::span<const std::uint8_t> data, std::uint32_t seed = 0) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t c = seed ^ 0xFFFFFFFFu;
    for (std::uint8_t b : data) c = table[(c ^ b) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

/// Little-endian byte packer. All multi-byte integers in the .gof format go
/// through this, so the file layout is host-independent.
class ByteWriter {
public:
    std::vector<std::uint8_t> bytes;

    std::size_t size() const { return bytes.size(); }

    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u16(std::uint16_t v) { for (int i = 0; i < 2; ++i) bytes.push_back((v >> (8 * i)) & 0xFF); }
    void u32(std::uint32_t v) { for (int i = 0; i < 4; ++i) bytes.push_back((v >> (8 * i)) & 0xFF); }
    void u64(std::uint64_t v) { for (int i = 0; i < 8; ++i) bytes.push_back((v >> (8 * i)) & 0xFF); }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }

    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void raw(std::span<const std::uint8_t> data) {
        bytes.insert(bytes.end(), data.begin(), data.end());
    }
    /// Patch a previously written u64 in place (offset tables).
    void patch_u64(std::size_t pos, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes[pos + i] = (v >> (8 * i)) & 0xFF;
    }
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }

    std::uint8_t u8() { need(1); return data_[pos_++]; }
    std::uint16_t u16() { return static_cast<std::uint16_t>(gather(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(gather(4)); }
    std::uint64_t u64() { return gather(8); }
    std::int64_t i64() { return static_cast<std::int64_t>(gather(8)); }

    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::span<const std::uint8_t> raw(std::size_t n) {
        need(n);
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) throw std::runtime_error("bitstream: unexpected end of data");
    }
    std::uint64_t gather(int n) {
        need(n);
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += n;
        return v;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

/// Random-access byte source so frame decoding can prove it touches only the
/// ranges it claims to (tests wrap this to trace reads).
class ByteSource {
public:
    virtual ~ByteSource() = default;
    virtual std::size_t size() const = 0;
    virtual void read(std::size_t offset, std::size_t len, std::uint8_t* dst) = 0;

    std::vector<std::uint8_t> read_vec(std::size_t offset, std::size_t len) {
        std::vector<std::uint8_t> v(len);
        read(offset, len, v.data());
        return v;
    }
};

class MemoryByteSource final : public ByteSource {
public:
    explicit MemoryByteSource(std::vector<std::uint8_t> data) : data_(std::move(data)) {}

    std::size_t size() const override { return data_.size(); }

    void read(std::size_t offset, std::size_t len, std::uint8_t* dst) override {
        if (offset + len > data_.size()) throw std::runtime_error("read past end of stream");
        std::memcpy(dst, data_.data() + offset, len);
    }

private:
    std::vector<std::uint8_t> data_;
};

class FileByteSource final : public ByteSource {
public:
    explicit FileByteSource(const std::string& path)
        : file_(path, std::ios::binary | std::ios::ate) {
        if (!file_) throw std::runtime_error("cannot open " + path);
        size_ = static_cast<std::size_t>(file_.tellg());
    }

    std::size_t size() const override { return size_; }

    void read(std::size_t offset, std::size_t len, std::uint8_t* dst) override {
        file_.seekg(static_cast<std::streamoff>(offset));
        file_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(len));
        if (!file_) throw std::runtime_error("short read");
    }

private:
    std::ifstream file_;
    std::size_t size_ = 0;
};

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    FileByteSource src(path);
    return src.read_vec(0, src.size());
}

}  // namespace jointrf
