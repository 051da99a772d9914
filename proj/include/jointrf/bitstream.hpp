#pragma once

#include <memory>
#include <vector>

#include "jointrf/field.hpp"
#include "jointrf/quantize.hpp"
#include "jointrf/range_coder.hpp"
#include "jointrf/serialize.hpp"

namespace jointrf {

inline constexpr char kGofMagic[4] = {'G', 'O', 'F', 'R'};
inline constexpr std::uint16_t kGofVersion = 1;

/// One trained group of frames plus everything a decoder needs: the shading
/// network and the seven entropy models that drive the frequency tables.
struct GofRepresentation {
    std::vector<FrameRepresentation> frames;  // frames[0] is the keyframe
    ShadingNetwork net;
    std::vector<EntropyModel> basis_models;  // one per basis level
    EntropyModel coeff_model;
    Real q = 10;

    const MultiResBasis& keyframe_basis() const { return frames.at(0).basis_or_residual; }
};

/// Round a parameter vector through IEEE float32. Applied to network and
/// entropy-model parameters before they are serialized so the encoder builds
/// its frequency tables from exactly the values the decoder will read.
inline void round_to_f32(std::vector<Real>& v) {
    for (Real& x : v) x = static_cast<Real>(static_cast<float>(x));
}

inline void round_to_f32(ShadingNetwork& net) {
    for (auto& w : net.weights) round_to_f32(w);
    for (auto& b : net.biases) round_to_f32(b);
}

namespace detail {

inline void write_model(ByteWriter& w, const EntropyModel& m) {
    w.u32(static_cast<std::uint32_t>(m.channels()));
    w.u32(static_cast<std::uint32_t>(m.params().size()));
    for (Real p : m.params()) w.f32(static_cast<float>(p));
}

inline void write_network(ByteWriter& w, const ShadingNetwork& net) {
    w.u32(static_cast<std::uint32_t>(net.layer_sizes.size()));
    for (int s : net.layer_sizes) w.u32(static_cast<std::uint32_t>(s));
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        for (Real v : net.weights[l]) w.f32(static_cast<float>(v));
        for (Real v : net.biases[l]) w.f32(static_cast<float>(v));
    }
}

inline void write_grid_shape(ByteWriter& w, const FeatureGrid& g) {
    w.u32(g.nx); w.u32(g.ny); w.u32(g.nz); w.u32(g.channels);
}

/// Encode one quantized grid into a chunk body: alphabet, payload size, payload.
inline void encode_grid(ByteWriter& w, const QuantizedGrid& qg, const EntropyModel& model) {
    const std::uint32_t alphabet = qg.alphabet_size();
    std::vector<FrequencyTable> tables(qg.channels);
    for (int c = 0; c < qg.channels; ++c)
        tables[c] = build_freq_table(model, c, alphabet, qg.min_q);
    auto payload = range_encode(qg.symbols, tables);
    w.u32(alphabet);
    w.u32(static_cast<std::uint32_t>(payload.size()));
    w.raw(payload);
}

inline QuantizedGrid decode_grid(ByteReader& r, const EntropyModel& model, int nx, int ny,
                                 int nz, int channels, const Bounds& bounds, Real q,
                                 std::int64_t min_q) {
    QuantizedGrid qg;
    qg.nx = nx; qg.ny = ny; qg.nz = nz; qg.channels = channels;
    qg.bounds = bounds;
    qg.q = q;
    qg.min_q = min_q;
    const std::uint32_t alphabet = r.u32();
    const std::uint32_t payload_len = r.u32();
    auto payload = r.raw(payload_len);
    std::vector<FrequencyTable> tables(channels);
    for (int c = 0; c < channels; ++c) tables[c] = build_freq_table(model, c, alphabet, min_q);
    qg.symbols = range_decode(payload, tables,
                              static_cast<std::size_t>(nx) * ny * nz * channels);
    return qg;
}

}  // namespace detail

/// Offsets parsed from (or produced into) a .gof header.
struct GofLayout {
    std::uint64_t header_size = 0;
    std::vector<std::uint64_t> chunk_offset;  // absolute, per frame
    std::vector<std::uint32_t> chunk_length;  // includes trailing CRC-32
};

/// Serialize a trained GOF. Grids are integer-quantized at gof.q, each grid
/// range-coded with static per-channel tables from its entropy model. Network
/// and model parameters are rounded through f32 by the caller (see
/// round_to_f32) or here on a copy, so encoder and decoder agree bit-exactly.
inline std::vector<std::uint8_t> encode_gof(const GofRepresentation& gof) {
    GofRepresentation g = gof;  // f32-round parameters on a copy
    round_to_f32(g.net);
    for (auto& m : g.basis_models) round_to_f32(m.params());
    round_to_f32(g.coeff_model.params());

    const auto& kb = g.keyframe_basis();
    const int levels = kb.level_count();
    const QuantConfig qc(g.q);

    // Quantize everything up front; min_q values go in the header.
    std::vector<std::vector<QuantizedGrid>> quantized(g.frames.size());
    for (std::size_t t = 0; t < g.frames.size(); ++t) {
        const auto& fr = g.frames[t];
        for (int l = 0; l < levels; ++l)
            quantized[t].push_back(quantize_grid(fr.basis_or_residual.levels[l], qc));
        quantized[t].push_back(quantize_grid(fr.coeff, qc));
    }

    ByteWriter w;
    w.raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(kGofMagic), 4));
    w.u16(kGofVersion);
    w.u32(static_cast<std::uint32_t>(g.frames.size()));
    w.f64(g.q);
    const Bounds& b = kb.levels[0].bounds;
    w.f64(b.lo.x); w.f64(b.lo.y); w.f64(b.lo.z);
    w.f64(b.hi.x); w.f64(b.hi.y); w.f64(b.hi.z);
    w.u32(static_cast<std::uint32_t>(levels));
    for (const auto& lv : kb.levels) detail::write_grid_shape(w, lv);
    detail::write_grid_shape(w, g.frames[0].coeff);
    detail::write_network(w, g.net);
    w.u32(static_cast<std::uint32_t>(g.basis_models.size() + 1));
    for (const auto& m : g.basis_models) detail::write_model(w, m);
    detail::write_model(w, g.coeff_model);

    // Per-grid min_q, frame-major, levels then coeff.
    for (const auto& frame_grids : quantized)
        for (const auto& qg : frame_grids) w.i64(qg.min_q);

    // Chunk offset table; offsets patched once chunks are laid out.
    const std::size_t table_pos = w.size();
    for (std::size_t t = 0; t < g.frames.size(); ++t) { w.u64(0); w.u32(0); }

    std::vector<std::uint64_t> offsets;
    std::vector<std::uint32_t> lengths;
    for (std::size_t t = 0; t < g.frames.size(); ++t) {
        ByteWriter chunk;
        for (int gi = 0; gi < levels + 1; ++gi) {
            const EntropyModel& model =
                gi < levels ? g.basis_models[gi] : g.coeff_model;
            detail::encode_grid(chunk, quantized[t][gi], model);
        }
        chunk.u32(crc32(chunk.bytes));
        offsets.push_back(w.size());
        lengths.push_back(static_cast<std::uint32_t>(chunk.bytes.size()));
        w.raw(chunk.bytes);
    }
    for (std::size_t t = 0; t < g.frames.size(); ++t) {
        w.patch_u64(table_pos + t * 12, offsets[t]);
        for (int i = 0; i < 4; ++i)
            w.bytes[table_pos + t * 12 + 8 + i] = (lengths[t] >> (8 * i)) & 0xFF;
    }
    return std::move(w.bytes);
}

inline void encode_gof_to_file(const GofRepresentation& gof, const std::string& path) {
    auto bytes = encode_gof(gof);
    write_file(path, bytes);
}

/// Header-driven reader with frame-level random access: decoding frame t
/// reads only the header, the keyframe chunk, and chunk t.
class GofReader {
public:
    explicit GofReader(std::shared_ptr<ByteSource> src) : src_(std::move(src)) {
        parse_header();
    }

    int frame_count() const { return static_cast<int>(layout_.chunk_offset.size()); }
    Real q() const { return q_; }
    const ShadingNetwork& net() const { return net_; }
    const std::vector<EntropyModel>& basis_models() const { return basis_models_; }
    const EntropyModel& coeff_model() const { return coeff_model_; }
    const GofLayout& layout() const { return layout_; }
    const Bounds& bounds() const { return bounds_; }

    /// Dequantized reconstruction of frame t's own grids (residual form for
    /// t > 0; callers compose with the keyframe basis to render).
    FrameRepresentation decode_frame(int t) {
        if (t < 0 || t >= frame_count()) throw std::out_of_range("frame index out of range");
        auto chunk = src_->read_vec(layout_.chunk_offset[t], layout_.chunk_length[t]);
        if (chunk.size() < 4) throw std::runtime_error("gof: truncated chunk");
        ByteReader r(std::span<const std::uint8_t>(chunk.data(), chunk.size() - 4));
        const std::uint32_t stored_crc =
            ByteReader(std::span<const std::uint8_t>(chunk).subspan(chunk.size() - 4)).u32();
        if (crc32(std::span<const std::uint8_t>(chunk.data(), chunk.size() - 4)) != stored_crc)
            throw std::runtime_error("gof: chunk CRC mismatch (corrupted stream)");

        FrameRepresentation frame;
        frame.kind = t == 0 ? FrameKind::keyframe : FrameKind::residual;
        frame.frame_index = t + 1;
        std::vector<FeatureGrid> lvls;
        for (std::size_t l = 0; l < level_shapes_.size(); ++l) {
            const auto& s = level_shapes_[l];
            auto qg = detail::decode_grid(r, basis_models_[l], s[0], s[1], s[2], s[3],
                                          bounds_, q_, min_q_[t * (level_shapes_.size() + 1) + l]);
            lvls.push_back(dequantize_grid(qg));
        }
        frame.basis_or_residual = MultiResBasis(std::move(lvls));
        auto qg = detail::decode_grid(r, coeff_model_, coeff_shape_[0], coeff_shape_[1],
                                      coeff_shape_[2], coeff_shape_[3], bounds_, q_,
                                      min_q_[t * (level_shapes_.size() + 1) + level_shapes_.size()]);
        frame.coeff = dequantize_grid(qg);
        return frame;
    }

    /// Decode the whole GOF back into a renderable representation.
    GofRepresentation decode_all() {
        GofRepresentation g;
        g.q = q_;
        g.net = net_;
        g.basis_models = basis_models_;
        g.coeff_model = coeff_model_;
        for (int t = 0; t < frame_count(); ++t) g.frames.push_back(decode_frame(t));
        return g;
    }

private:
    /// Sequential cursor over the source. Reads stay inside the header so the
    /// random-access contract (header + needed chunks only) is honest.
    struct Cursor {
        ByteSource& src;
        std::size_t pos = 0;

        std::vector<std::uint8_t> take(std::size_t n) {
            auto v = src.read_vec(pos, n);
            pos += n;
            return v;
        }
        std::uint32_t u32() { return ByteReader(take(4)).u32(); }
        std::uint64_t u64() { return ByteReader(take(8)).u64(); }
        std::int64_t i64() { return ByteReader(take(8)).i64(); }
        double f64() { return ByteReader(take(8)).f64(); }
    };

    void parse_header() {
        Cursor r{*src_};
        auto prefix = r.take(6);
        if (std::memcmp(prefix.data(), kGofMagic, 4) != 0)
            throw std::runtime_error("gof: bad magic (not a GOFR stream)");
        if (ByteReader(std::span<const std::uint8_t>(prefix).subspan(4)).u16() != kGofVersion)
            throw std::runtime_error("gof: unsupported version");

        const auto frames = r.u32();
        q_ = r.f64();
        Vec3 lo{r.f64(), r.f64(), r.f64()};
        Vec3 hi{r.f64(), r.f64(), r.f64()};
        bounds_ = Bounds(lo, hi);
        const auto levels = r.u32();
        {
            auto shapes = r.take((levels + 1) * 16);
            ByteReader br(shapes);
            for (std::uint32_t l = 0; l < levels; ++l) {
                std::array<int, 4> s;
                for (auto& v : s) v = static_cast<int>(br.u32());
                level_shapes_.push_back(s);
            }
            for (auto& v : coeff_shape_) v = static_cast<int>(br.u32());
        }
        {
            const auto n_layers = r.u32();
            auto sizes_bytes = r.take(n_layers * 4);
            ByteReader br(sizes_bytes);
            net_.layer_sizes.resize(n_layers);
            std::size_t wcount = 0;
            for (auto& s : net_.layer_sizes) s = static_cast<int>(br.u32());
            for (std::size_t l = 0; l + 1 < net_.layer_sizes.size(); ++l)
                wcount += static_cast<std::size_t>(net_.layer_sizes[l]) * net_.layer_sizes[l + 1] +
                          net_.layer_sizes[l + 1];
            auto wbytes = r.take(wcount * 4);
            ByteReader wr(wbytes);
            for (std::size_t l = 0; l + 1 < net_.layer_sizes.size(); ++l) {
                std::size_t in = net_.layer_sizes[l], out = net_.layer_sizes[l + 1];
                net_.weights.emplace_back(in * out);
                net_.biases.emplace_back(out);
                for (auto& v : net_.weights.back()) v = wr.f32();
                for (auto& v : net_.biases.back()) v = wr.f32();
            }
        }
        const auto n_models = r.u32();
        if (n_models != levels + 1) throw std::runtime_error("gof: model count mismatch");
        auto read_model = [&] {
            auto hdr = r.take(8);
            ByteReader hr(hdr);
            const auto channels = hr.u32();
            const auto count = hr.u32();
            RandomStream dummy(0);
            EntropyModel m(static_cast<int>(channels), dummy);
            if (count != m.params().size())
                throw std::runtime_error("gof: entropy model size mismatch");
            auto pbytes = r.take(count * 4);
            ByteReader pr(pbytes);
            for (auto& p : m.params()) p = pr.f32();
            return m;
        };
        for (std::uint32_t i = 0; i < levels; ++i) basis_models_.push_back(read_model());
        coeff_model_ = read_model();
        {
            auto mq = r.take(static_cast<std::size_t>(frames) * (levels + 1) * 8);
            ByteReader br(mq);
            for (std::uint32_t t = 0; t < frames * (levels + 1); ++t) min_q_.push_back(br.i64());
        }
        {
            auto tb = r.take(static_cast<std::size_t>(frames) * 12);
            ByteReader br(tb);
            for (std::uint32_t t = 0; t < frames; ++t) {
                layout_.chunk_offset.push_back(br.u64());
                layout_.chunk_length.push_back(br.u32());
            }
        }
        layout_.header_size = r.pos;
    }

    std::shared_ptr<ByteSource> src_;
    Real q_ = 1;
    Bounds bounds_;
    std::vector<std::array<int, 4>> level_shapes_;
    std::array<int, 4> coeff_shape_{};
    ShadingNetwork net_;
    std::vector<EntropyModel> basis_models_;
    EntropyModel coeff_model_;
    std::vector<std::int64_t> min_q_;
    GofLayout layout_;
};

inline GofRepresentation decode_gof(const std::vector<std::uint8_t>& bytes) {
    GofReader reader(std::make_shared<MemoryByteSource>(bytes));
    return reader.decode_all();
}

}  // namespace jointrf
