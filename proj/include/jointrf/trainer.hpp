#pragma once

#include <fstream>
#include <functional>
#include <numeric>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "jointrf/adam.hpp"
#include "jointrf/bitstream.hpp"
#include "jointrf/rate_quant.hpp"
#include "jointrf/render_image.hpp"
#include "jointrf/scene.hpp"

namespace jointrf {

/// Default rate-distortion sweep used by the `rdcurve` command.
inline constexpr std::array<Real, 4> kDefaultQSweep{1, 2, 5, 10};

struct TrainConfig {
    Real lambda1 = 1e-6;
    Real lambda2 = 1e-6;
    Real lambda1_floor = 1e-7;  // linear decay target over the second half
    Real q = 10;
    int gof_length = 10;

    Real lr_grids = 2e-2;
    Real lr_net = 1e-3;
    Real lr_entropy = 1e-3;
    int keyframe_iters = 4000;
    int residual_iters = 1500;
    int rays_per_batch = 4096;
    int samples_per_ray = 128;
    std::uint64_t seed = 0;
    int threads = 1;

    // Representation geometry (config-overridable toy defaults).
    std::vector<std::array<int, 3>> basis_resolutions = {
        {8, 8, 8}, {12, 12, 12}, {16, 16, 16}, {24, 24, 24}, {32, 32, 32}, {48, 48, 48}};
    int basis_channels = 4;
    std::array<int, 3> coeff_resolution = {48, 48, 48};
    int hidden_width = 64;
    int hidden_layers = 2;

    // Per-iteration element subsample for the rate gradient; 0 = every element.
    // The logged/final rate term is always the full Eq.-8 mean.
    std::size_t rate_subsample = 16384;

    // Warm-start each residual frame's coefficient grid from the previous
    // frame instead of a fresh uniform draw.
    bool warm_start_coeff = true;

    // Simulated quantization and rate/L1 terms on or off (ablation switches).
    bool simulate_quantization = true;

    void validate() const {
        if (lambda1 < 0 || lambda2 < 0) throw std::invalid_argument("lambdas must be >= 0");
        if (gof_length < 1) throw std::invalid_argument("GOF length must be >= 1");
        if (!(q > 0)) throw std::invalid_argument("q must be positive");
    }
};

/// Nonincreasing rate-weight schedule: constant lambda1 through the first
/// half of the run, then linear decay to the configured floor.
inline Real lambda_schedule(int iteration, int total_iters, const TrainConfig& cfg) {
    if (iteration < 0) throw std::invalid_argument("iteration must be >= 0");
    const Real floor = std::min(cfg.lambda1_floor, cfg.lambda1);
    if (total_iters <= 1) return cfg.lambda1;
    const Real half = 0.5 * (total_iters - 1);
    if (iteration <= half) return cfg.lambda1;
    const Real t = (iteration - half) / (total_iters - 1 - half);
    return cfg.lambda1 + (floor - cfg.lambda1) * std::min<Real>(t, 1.0);
}

/// Eq.-6 combination. The keyframe stage passes residual_l1 = 0.
inline Real total_loss(Real mse, const RateLoss& rate, Real residual_l1, Real lambda1,
                       Real lambda2) {
    const Real v = mse + lambda1 * rate.total() + lambda2 * residual_l1;
    if (!std::isfinite(v))
        throw std::runtime_error("total_loss: non-finite component (training diverged)");
    return v;
}

/// Exactly what a decoder reconstructs for the keyframe: quantized grids,
/// f32-rounded network and entropy models.
struct KeyframeBuffer {
    MultiResBasis basis;  // B-hat_1
    FeatureGrid coeff;    // C-hat_1
    ShadingNetwork net;   // frozen
    std::vector<EntropyModel> basis_models;
    EntropyModel coeff_model;
    Real q = 10;
};

struct TrainLogRow {
    int frame = 0;
    int iteration = 0;
    Real mse = 0;
    Real rate_bits = 0;
    Real l1 = 0;
    Real psnr = 0;  // per-channel batch proxy during training; eval PSNR on final rows
};

struct TrainLog {
    std::vector<TrainLogRow> rows;

    void write_csv(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot write " + path);
        f << "frame,iteration,mse,rate_bits,l1,psnr\n";
        for (const auto& r : rows)
            f << r.frame << "," << r.iteration << "," << r.mse << "," << r.rate_bits << ","
              << r.l1 << "," << r.psnr << "\n";
    }
};

namespace detail {

/// Training views resident in memory as [0,1] floats.
struct TrainSet {
    std::vector<Camera> cameras;
    std::vector<std::vector<Real>> pixels;  // [view][y * w * 3 + ...]
    int width = 0, height = 0;
    std::array<Real, 3> background{0, 0, 0};

    static TrainSet load(const Dataset& ds, int frame) {
        TrainSet s;
        s.width = ds.width;
        s.height = ds.height;
        s.background = ds.background;
        for (int v : ds.view_indices("train")) {
            s.cameras.push_back(ds.views[v].camera);
            Image img = ds.load_image(frame, v);
            std::vector<Real> px(img.rgb.size());
            for (std::size_t i = 0; i < px.size(); ++i) px[i] = img.rgb[i] / 255.0;
            s.pixels.push_back(std::move(px));
        }
        if (s.cameras.empty()) throw std::runtime_error("dataset has no training views");
        return s;
    }
};

struct GradBuffers {
    std::vector<std::vector<Real>> basis;  // per level
    std::vector<Real> coeff;
    std::vector<std::vector<Real>> net_w, net_b;

    static GradBuffers like(const MultiResBasis& basis, const FeatureGrid& coeff,
                            const ShadingNetwork& net, bool with_net) {
        GradBuffers g;
        for (const auto& l : basis.levels) g.basis.emplace_back(l.size(), 0.0);
        g.coeff.assign(coeff.size(), 0.0);
        if (with_net) {
            for (const auto& w : net.weights) g.net_w.emplace_back(w.size(), 0.0);
            for (const auto& b : net.biases) g.net_b.emplace_back(b.size(), 0.0);
        }
        return g;
    }

    void zero() {
        for (auto& v : basis) std::fill(v.begin(), v.end(), 0.0);
        std::fill(coeff.begin(), coeff.end(), 0.0);
        for (auto& v : net_w) std::fill(v.begin(), v.end(), 0.0);
        for (auto& v : net_b) std::fill(v.begin(), v.end(), 0.0);
    }

    void add(const GradBuffers& o) {
        for (std::size_t l = 0; l < basis.size(); ++l)
            for (std::size_t i = 0; i < basis[l].size(); ++i) basis[l][i] += o.basis[l][i];
        for (std::size_t i = 0; i < coeff.size(); ++i) coeff[i] += o.coeff[i];
        for (std::size_t l = 0; l < net_w.size(); ++l) {
            for (std::size_t i = 0; i < net_w[l].size(); ++i) net_w[l][i] += o.net_w[l][i];
            for (std::size_t i = 0; i < net_b[l].size(); ++i) net_b[l][i] += o.net_b[l][i];
        }
    }
};

struct RayTask {
    Ray ray;
    std::array<Real, 3> target;
};

/// Forward + reverse pass for one ray batch against the (noisy) frame.
/// Returns the batch-mean MSE; gradients land in per-thread shards that are
/// reduced in index order, so results are independent of scheduling.
inline Real render_batch_backward(const FrameRepresentation& frame,
                                  const MultiResBasis& keyframe_basis,
                                  const ShadingNetwork& net,
                                  const std::vector<RayTask>& batch, const RenderConfig& cfg,
                                  std::uint64_t jitter_salt, bool train_net,
                                  GradBuffers& grads, int threads) {
    const int n = static_cast<int>(batch.size());
    const int shards = std::max(1, threads);
    std::vector<GradBuffers> shard(shards);
    for (auto& s : shard)
        s = GradBuffers::like(frame.basis_or_residual, frame.coeff, net, train_net);
    std::vector<Real> shard_mse(shards, 0.0);

#pragma omp parallel num_threads(shards)
    {
#ifdef _OPENMP
        const int tid = omp_get_thread_num();
#else
        const int tid = 0;
#endif
        GradBuffers& g = shard[tid];
        FieldGradients fg;
        fg.basis_levels = &g.basis;
        fg.coeff = &g.coeff;
        fg.net_w = train_net ? &g.net_w : nullptr;
        fg.net_b = train_net ? &g.net_b : nullptr;

        std::vector<FieldTape> tapes;
        std::vector<FieldSample> fields;
        std::vector<std::array<Real, 3>> dcolor;
        std::vector<Real> ddensity;

        // Static contiguous partition: shard s owns rays [s*n/shards, ...).
        const int lo = static_cast<int>(static_cast<long long>(tid) * n / shards);
        const int hi = static_cast<int>(static_cast<long long>(tid + 1) * n / shards);
        for (int ri = lo; ri < hi; ++ri) {
            Ray ray = batch[ri].ray;
            Real t0, t1;
            std::array<Real, 3> rendered = cfg.background;
            bool hit = frame.coeff.bounds.intersect(ray.origin, ray.direction, t0, t1) && t1 > t0;
            RaySamples samples;
            if (hit) {
                ray.near = t0;
                ray.far = t1;
                RandomStream ray_rng(jitter_salt ^ (0x9E3779B97F4A7C15ull * (ri + 1)));
                samples = sample_ray(ray, cfg.samples_per_ray, cfg.jitter, ray_rng);
                const int ns = static_cast<int>(samples.t.size());
                if (static_cast<int>(tapes.size()) < ns) tapes.resize(ns);
                fields.resize(ns);
                for (int i = 0; i < ns; ++i)
                    fields[i] = query_field(frame, keyframe_basis, net, samples.position[i],
                                            ray.direction, &tapes[i]);
                RayRadiance rad = render_ray(samples, fields);
                Real wsum = 0;
                for (Real w : rad.weight) wsum += w;
                for (int k = 0; k < 3; ++k)
                    rendered[k] = rad.rgb[k] + (1 - wsum) * cfg.background[k];
            }

            std::array<Real, 3> err;
            Real se = 0;
            for (int k = 0; k < 3; ++k) {
                err[k] = rendered[k] - batch[ri].target[k];
                se += err[k] * err[k];
            }
            shard_mse[tid] += se;
            if (!hit) continue;

            // d(mean over rays of |err|^2)/d rendered
            std::array<Real, 3> drgb;
            for (int k = 0; k < 3; ++k) drgb[k] = 2.0 * err[k] / n;
            render_ray_backward(samples, fields, drgb, dcolor, ddensity, cfg.background);
            for (std::size_t i = 0; i < samples.t.size(); ++i) {
                // Raw-head sigmoid/softplus chain happens inside; skip dead samples.
                if (dcolor[i][0] == 0 && dcolor[i][1] == 0 && dcolor[i][2] == 0 &&
                    ddensity[i] == 0)
                    continue;
                query_field_backward(frame, keyframe_basis, net, tapes[i], dcolor[i],
                                     ddensity[i], fg);
            }
        }
    }

    Real mse = 0;
    for (int s = 0; s < shards; ++s) {
        mse += shard_mse[s];
        grads.add(shard[s]);
    }
    return mse / n;
}

/// Rate term over one grid's q-scaled noisy values with optional element
/// subsampling for the per-iteration gradient. dvalues/dmodel may be null.
inline Real rate_grad_grid(const std::vector<Real>& scaled, int channels,
                           const EntropyModel& model, std::size_t subsample, RandomStream& rng,
                           Real lambda1, Real share /* of the rate mean */,
                           Real value_chain /* d(scaled)/d(param) = q */,
                           std::vector<Real>* dvalues, std::vector<Real>* dmodel) {
    constexpr Real inv_ln2 = 1.4426950408889634;
    const std::size_t total = scaled.size();
    const std::size_t n = (subsample == 0 || subsample >= total) ? total : subsample;
    Real bits = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t idx = (n == total) ? k : rng.below(total);
        const int c = static_cast<int>(idx % channels);
        const Real y = scaled[idx];
        const Real p = model.pmf(c, y);
        bits += -std::log2(p);
        if (!dvalues && !dmodel) continue;
        Real dy = 0;
        const Real upstream = -lambda1 * share * inv_ln2 / (p * static_cast<Real>(n));
        model.pmf_grad(c, y, upstream, dmodel ? dmodel->data() : nullptr,
                       dvalues ? &dy : nullptr);
        if (dvalues) (*dvalues)[idx] += dy * value_chain;
    }
    return bits / static_cast<Real>(n) * share;
}

}  // namespace detail

/// Full-precision Eq.-8 rate of a frame's raw grids at integer symbols
/// (the value the realized bitstream should track).
inline RateLoss frame_rate_at_symbols(const FrameRepresentation& frame,
                                      const std::vector<EntropyModel>& basis_models,
                                      const EntropyModel& coeff_model, Real q) {
    auto scaled_rounded = [&](const FeatureGrid& g) {
        FeatureGrid s = g;
        for (Real& v : s.data) v = static_cast<Real>(round_half_away(q * v));
        return s;
    };
    std::vector<FeatureGrid> res;
    for (const auto& l : frame.basis_or_residual.levels) res.push_back(scaled_rounded(l));
    return rate_loss(res, scaled_rounded(frame.coeff), basis_models, coeff_model);
}

struct FrameTrainStats {
    Real final_mse = 0;
    Real final_rate_bits = 0;  // full-grid simulated-quantization estimate
    Real final_l1 = 0;
};

/// Shared optimization loop. For the keyframe stage (buffer == nullptr) it
/// trains {B_1, C_1, net, entropy models}; for residual stages it trains only
/// {R_t, C_t} against the frozen reconstructed buffer.
inline FrameTrainStats optimize_frame(FrameRepresentation& frame, ShadingNetwork& net,
                                      std::vector<EntropyModel>& basis_models,
                                      EntropyModel& coeff_model,
                                      const KeyframeBuffer* buffer,
                                      const detail::TrainSet& data, const TrainConfig& cfg,
                                      int iters, RandomStream& rng, TrainLog* log,
                                      int frame_number) {
    const bool keyframe_stage = buffer == nullptr;
    const QuantConfig qc(cfg.q);
    const int levels = frame.basis_or_residual.level_count();

    // Adam state per parameter block.
    std::vector<AdamState> st_basis;
    for (const auto& l : frame.basis_or_residual.levels) st_basis.emplace_back(l.size());
    AdamState st_coeff(frame.coeff.size());
    std::vector<AdamState> st_net_w, st_net_b;
    std::vector<AdamState> st_models;
    if (keyframe_stage) {
        for (const auto& w : net.weights) st_net_w.emplace_back(w.size());
        for (const auto& b : net.biases) st_net_b.emplace_back(b.size());
        for (const auto& m : basis_models) st_models.emplace_back(m.params().size());
        st_models.emplace_back(coeff_model.params().size());
    }

    RenderConfig rc;
    rc.samples_per_ray = cfg.samples_per_ray;
    rc.jitter = true;
    rc.background = data.background;

    FrameRepresentation noisy = frame;  // shapes reused every iteration
    std::vector<std::vector<Real>> scaled_basis(levels);
    std::vector<Real> scaled_coeff;

    detail::GradBuffers grads = detail::GradBuffers::like(frame.basis_or_residual, frame.coeff,
                                                          net, keyframe_stage);
    std::vector<std::vector<Real>> model_grads;
    if (keyframe_stage) {
        for (const auto& m : basis_models) model_grads.emplace_back(m.params().size(), 0.0);
        model_grads.emplace_back(coeff_model.params().size(), 0.0);
    }

    FrameTrainStats stats;
    std::vector<detail::RayTask> batch(cfg.rays_per_batch);

    for (int it = 0; it < iters; ++it) {
        const Real lambda1 = lambda_schedule(it, iters, cfg);
        grads.zero();
        for (auto& g : model_grads) std::fill(g.begin(), g.end(), 0.0);

        // (1) simulated quantization of this frame's trainable grids
        for (int l = 0; l < levels; ++l) {
            const auto& src = frame.basis_or_residual.levels[l].data;
            auto& y = scaled_basis[l];
            y.resize(src.size());
            auto& out = noisy.basis_or_residual.levels[l].data;
            for (std::size_t i = 0; i < src.size(); ++i) {
                y[i] = cfg.q * src[i] + (cfg.simulate_quantization ? rng.uniform(-0.5, 0.5) : 0.0);
                out[i] = y[i] / cfg.q;
            }
        }
        {
            const auto& src = frame.coeff.data;
            scaled_coeff.resize(src.size());
            auto& out = noisy.coeff.data;
            for (std::size_t i = 0; i < src.size(); ++i) {
                scaled_coeff[i] =
                    cfg.q * src[i] + (cfg.simulate_quantization ? rng.uniform(-0.5, 0.5) : 0.0);
                out[i] = scaled_coeff[i] / cfg.q;
            }
        }

        // (2) ray batch
        for (auto& task : batch) {
            const auto view = rng.below(data.cameras.size());
            const int px = static_cast<int>(rng.below(data.width));
            const int py = static_cast<int>(rng.below(data.height));
            task.ray = generate_ray(data.cameras[view], px, py);
            const std::size_t base = (static_cast<std::size_t>(py) * data.width + px) * 3;
            for (int k = 0; k < 3; ++k) task.target[k] = data.pixels[view][base + k];
        }

        // (3) photometric forward/backward
        const MultiResBasis& kb = keyframe_stage ? noisy.basis_or_residual : buffer->basis;
        const Real mse = detail::render_batch_backward(noisy, kb, net, batch, rc,
                                                       rng.next_u64(), keyframe_stage, grads,
                                                       cfg.threads);

        // (4) rate term on the q-scaled noisy values
        Real rate_bits = 0;
        if (lambda1 > 0 || log) {
            std::size_t res_total = 0;
            for (const auto& y : scaled_basis) res_total += y.size();
            for (int l = 0; l < levels; ++l)
                rate_bits += detail::rate_grad_grid(
                    scaled_basis[l], frame.basis_or_residual.levels[l].channels, basis_models[l],
                    cfg.rate_subsample, rng, lambda1,
                    static_cast<Real>(scaled_basis[l].size()) / res_total, cfg.q,
                    lambda1 > 0 ? &grads.basis[l] : nullptr,
                    (keyframe_stage && lambda1 > 0) ? &model_grads[l] : nullptr);
            rate_bits += detail::rate_grad_grid(
                scaled_coeff, frame.coeff.channels, coeff_model, cfg.rate_subsample, rng,
                lambda1, 1.0, cfg.q, lambda1 > 0 ? &grads.coeff : nullptr,
                (keyframe_stage && lambda1 > 0) ? &model_grads[levels] : nullptr);
        }

        // (5) L1 shrinkage on the residual grids (absent for keyframes)
        Real l1 = 0;
        if (!keyframe_stage) {
            std::size_t count = 0;
            for (const auto& l : frame.basis_or_residual.levels) count += l.size();
            for (int l = 0; l < levels; ++l) {
                const auto& src = frame.basis_or_residual.levels[l].data;
                for (std::size_t i = 0; i < src.size(); ++i) {
                    l1 += std::abs(src[i]);
                    if (cfg.lambda2 > 0 && src[i] != 0)
                        grads.basis[l][i] += cfg.lambda2 * (src[i] > 0 ? 1.0 : -1.0) / count;
                }
            }
            l1 /= count;
        }

        if (!std::isfinite(mse) || !std::isfinite(rate_bits))
            throw std::runtime_error("training diverged (non-finite loss) at iteration " +
                                     std::to_string(it));

        // (6) updates
        for (int l = 0; l < levels; ++l)
            adam_step(frame.basis_or_residual.levels[l].data, grads.basis[l], st_basis[l],
                      cfg.lr_grids);
        adam_step(frame.coeff.data, grads.coeff, st_coeff, cfg.lr_grids);
        if (keyframe_stage) {
            for (std::size_t l = 0; l < net.weights.size(); ++l) {
                adam_step(net.weights[l], grads.net_w[l], st_net_w[l], cfg.lr_net);
                adam_step(net.biases[l], grads.net_b[l], st_net_b[l], cfg.lr_net);
            }
            if (cfg.lambda1 > 0) {
                for (std::size_t m = 0; m < basis_models.size(); ++m)
                    adam_step(basis_models[m].params(), model_grads[m], st_models[m],
                              cfg.lr_entropy);
                adam_step(coeff_model.params(), model_grads[levels], st_models[levels],
                          cfg.lr_entropy);
            }
        }

        stats.final_mse = mse;
        stats.final_l1 = l1;
        if (log) {
            TrainLogRow row;
            row.frame = frame_number;
            row.iteration = it;
            row.mse = mse;
            row.rate_bits = rate_bits;
            row.l1 = l1;
            row.psnr = mse > 0 ? 10.0 * std::log10(3.0 / mse) : 99.0;
            log->rows.push_back(row);
        }
    }

    // Full-grid rate at the final parameters (noise-free integer symbols).
    stats.final_rate_bits =
        frame_rate_at_symbols(frame, basis_models, coeff_model, cfg.q).total();
    return stats;
}

struct KeyframeTrainResult {
    FrameRepresentation frame;  // raw-float B_1, C_1
    ShadingNetwork net;         // frozen (f32-rounded)
    std::vector<EntropyModel> basis_models;
    EntropyModel coeff_model;
    KeyframeBuffer buffer;
    FrameTrainStats stats;
};

inline FrameRepresentation make_keyframe_init(const TrainConfig& cfg, const Bounds& bounds,
                                              RandomStream& rng) {
    std::vector<FeatureGrid> lvls;
    for (const auto& r : cfg.basis_resolutions) {
        FeatureGrid g(r[0], r[1], r[2], cfg.basis_channels, bounds);
        g.fill_uniform(rng, -0.05, 0.05);
        lvls.push_back(std::move(g));
    }
    FrameRepresentation f;
    f.kind = FrameKind::keyframe;
    f.frame_index = 1;
    f.basis_or_residual = MultiResBasis(std::move(lvls));
    f.coeff = FeatureGrid(cfg.coeff_resolution[0], cfg.coeff_resolution[1],
                          cfg.coeff_resolution[2], f.basis_or_residual.total_channels(), bounds);
    f.coeff.fill_uniform(rng, -0.05, 0.05);
    return f;
}

/// Stage 1 of a GOF: fit {B_1, C_1, net, entropy models} on the keyframe's
/// views with simulated quantization and the keyframe rate term, then freeze
/// the network and build the reconstructed buffer.
inline KeyframeTrainResult train_keyframe(const Dataset& ds, int frame, const TrainConfig& cfg,
                                          TrainLog* log = nullptr) {
    cfg.validate();
    RandomStream rng(cfg.seed * 0x51ED2701 + frame + 1);
    auto data = detail::TrainSet::load(ds, frame);

    KeyframeTrainResult r;
    r.frame = make_keyframe_init(cfg, ds.bounds, rng);
    r.net = ShadingNetwork(r.frame.basis_or_residual.total_channels(), cfg.hidden_width,
                           cfg.hidden_layers, rng);
    for (int l = 0; l < r.frame.basis_or_residual.level_count(); ++l)
        r.basis_models.emplace_back(cfg.basis_channels, rng);
    r.coeff_model = EntropyModel(r.frame.coeff.channels, rng);

    r.stats = optimize_frame(r.frame, r.net, r.basis_models, r.coeff_model, nullptr, data, cfg,
                             cfg.keyframe_iters, rng, log, frame);

    // Freeze: decoder-visible precision for the network and the models.
    round_to_f32(r.net);
    for (auto& m : r.basis_models) round_to_f32(m.params());
    round_to_f32(r.coeff_model.params());

    const QuantConfig qc(cfg.q);
    std::vector<FeatureGrid> rec;
    for (const auto& l : r.frame.basis_or_residual.levels)
        rec.push_back(dequantize_grid(quantize_grid(l, qc)));
    r.buffer.basis = MultiResBasis(std::move(rec));
    r.buffer.coeff = dequantize_grid(quantize_grid(r.frame.coeff, qc));
    r.buffer.net = r.net;
    r.buffer.basis_models = r.basis_models;
    r.buffer.coeff_model = r.coeff_model;
    r.buffer.q = cfg.q;
    return r;
}

/// Stage t > 1: fit {R_t, C_t} against the frozen reconstructed keyframe.
inline FrameRepresentation train_residual_frame(const Dataset& ds, int frame,
                                                const KeyframeBuffer& buffer,
                                                const TrainConfig& cfg,
                                                const FrameRepresentation* previous = nullptr,
                                                TrainLog* log = nullptr,
                                                FrameTrainStats* stats_out = nullptr) {
    cfg.validate();
    RandomStream rng(cfg.seed * 0x51ED2701 + frame + 1);
    auto data = detail::TrainSet::load(ds, frame);

    FrameRepresentation f;
    f.kind = FrameKind::residual;
    f.frame_index = frame + 1;
    std::vector<FeatureGrid> lvls;
    for (const auto& l : buffer.basis.levels) {
        FeatureGrid g(l.nx, l.ny, l.nz, l.channels, l.bounds);  // residuals start at exactly 0
        lvls.push_back(std::move(g));
    }
    f.basis_or_residual = MultiResBasis(std::move(lvls));
    if (cfg.warm_start_coeff && previous) {
        f.coeff = previous->coeff;
    } else {
        f.coeff = FeatureGrid(buffer.coeff.nx, buffer.coeff.ny, buffer.coeff.nz,
                              buffer.coeff.channels, buffer.coeff.bounds);
        f.coeff.fill_uniform(rng, -0.05, 0.05);
    }
    f.validate(buffer.basis);

    ShadingNetwork net = buffer.net;  // frozen
    std::vector<EntropyModel> basis_models = buffer.basis_models;  // frozen
    EntropyModel coeff_model = buffer.coeff_model;
    auto stats = optimize_frame(f, net, basis_models, coeff_model, &buffer, data, cfg,
                                cfg.residual_iters, rng, log, frame);
    if (stats_out) *stats_out = stats;
    return f;
}

struct SequenceResult {
    std::vector<GofRepresentation> gofs;        // raw-float trained representations
    std::vector<std::vector<std::uint8_t>> bitstreams;
    TrainLog log;
};

/// Whole-sequence driver: GOF partition, keyframe stage, sequential residual
/// stages, per-GOF encoding.
inline SequenceResult train_sequence(const Dataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    if (ds.frame_count < 1) throw std::invalid_argument("dataset has no frames");

    SequenceResult out;
    for (int start = 0; start < ds.frame_count; start += cfg.gof_length) {
        const int len = std::min(cfg.gof_length, ds.frame_count - start);
        auto key = train_keyframe(ds, start, cfg, &out.log);

        GofRepresentation gof;
        gof.q = cfg.q;
        gof.net = key.net;
        gof.basis_models = key.basis_models;
        gof.coeff_model = key.coeff_model;
        gof.frames.push_back(key.frame);

        const FrameRepresentation* prev = &key.frame;
        for (int t = 1; t < len; ++t) {
            auto f = train_residual_frame(ds, start + t, key.buffer, cfg, prev, &out.log);
            gof.frames.push_back(std::move(f));
            prev = &gof.frames.back();
        }
        out.bitstreams.push_back(encode_gof(gof));
        out.gofs.push_back(std::move(gof));
    }
    return out;
}

}  // namespace jointrf
