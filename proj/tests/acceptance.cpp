// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. argv[1] (optional) is the path to the built CLI binary, smoke-run
// as part of the config-fidelity check.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <algorithm>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "jointrf/eval.hpp"
#include "jointrf/trainer.hpp"

using namespace jointrf;
namespace fs = std::filesystem;

namespace {

int g_threads = 1;

int pick_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("JOINTRF_THREADS")) hw = std::atoi(env);
    return static_cast<int>(std::clamp<unsigned>(hw ? hw : 1, 1, 8));
}

/// Small but non-trivial setup shared by the training-based criteria.
TrainConfig desk_config() {
    TrainConfig cfg;
    cfg.basis_resolutions = {{4, 4, 4}, {8, 8, 8}};
    cfg.basis_channels = 2;
    cfg.coeff_resolution = {12, 12, 12};
    cfg.hidden_width = 16;
    cfg.hidden_layers = 2;
    cfg.keyframe_iters = 800;
    cfg.residual_iters = 300;
    cfg.rays_per_batch = 512;
    cfg.samples_per_ray = 32;
    cfg.rate_subsample = 0;  // full-grid rate pass every iteration at this scale
    cfg.lr_entropy = 2e-2;
    cfg.threads = g_threads;
    return cfg;
}

SyntheticScene toy_scene(int frames) {
    SyntheticScene s;
    s.bounds = Bounds({-1, -1, -1}, {1, 1, 1});
    s.frame_count = frames;
    Primitive a;
    a.center = {-0.15, 0.05, 0};
    a.velocity = {0.03, 0, 0.015};
    a.radius = 0.38;
    a.color = {0.9, 0.35, 0.2};
    a.density = 25;
    Primitive b;
    b.center = {0.35, -0.3, 0.2};
    b.radius = 0.22;
    b.color = {0.2, 0.6, 0.9};
    b.density = 40;
    s.primitives = {a, b};
    return s;
}

Dataset make_dataset(int frames, const fs::path& dir) {
    fs::remove_all(dir);
    const int size = 24;
    auto train = orbit_cameras(3, 3.0, {0, 0, 0}, size, size, 0.9 * size);
    auto test = orbit_cameras(5, 2.8, {0, 0, 0}, size, size, 0.9 * size);
    test.erase(test.begin(), test.end() - 1);  // one held-out view
    return generate_scene(toy_scene(frames), train, test, dir, 64);
}

GofRepresentation single_frame_gof(const KeyframeTrainResult& key, Real q) {
    GofRepresentation g;
    g.q = q;
    g.net = key.net;
    g.basis_models = key.basis_models;
    g.coeff_model = key.coeff_model;
    g.frames.push_back(key.frame);
    return g;
}

/// Mean -log2 pmf over one grid at its realized integer symbols, in bits.
Real grid_estimate_bits(const FeatureGrid& g, const EntropyModel& model, Real q) {
    Real bits = 0;
    const QuantConfig qc(q);
    auto qg = quantize_grid(g, qc);
    for (std::size_t i = 0; i < qg.symbols.size(); ++i) {
        const int c = static_cast<int>(i % g.channels);
        bits += -std::log2(model.pmf(c, static_cast<Real>(
                                            static_cast<std::int64_t>(qg.symbols[i]) + qg.min_q)));
    }
    return bits;
}

std::size_t grid_payload_bytes(const FeatureGrid& g, const EntropyModel& model, Real q) {
    const QuantConfig qc(q);
    auto qg = quantize_grid(g, qc);
    std::vector<FrequencyTable> tables(g.channels);
    for (int c = 0; c < g.channels; ++c)
        tables[c] = build_freq_table(model, c, qg.alphabet_size(), qg.min_q);
    return range_encode(qg.symbols, tables).size();
}

// ---------------------------------------------------------------------------

bool criterion_codec_lossless(std::string& out) {
    RandomStream rng(11);
    const Real qs[] = {1, 2, 5, 10};
    for (int iter = 0; iter < 1000; ++iter) {
        const Real q = qs[rng.below(4)];
        const int levels = 1 + static_cast<int>(rng.below(2));
        const int ch = 1 + static_cast<int>(rng.below(3));
        Bounds bounds({-1, -1, -1}, {1, 1, 1});

        std::vector<FeatureGrid> lvls;
        const int base = 2 + static_cast<int>(rng.below(3));
        for (int l = 0; l < levels; ++l) {
            const int n = base + 2 * l;  // levels must strictly increase
            FeatureGrid g(n, n, n, ch, bounds);
            const Real span = rng.uniform(0.01, 2.0);
            g.fill_uniform(rng, -span, span);
            lvls.push_back(std::move(g));
        }
        GofRepresentation gof;
        gof.q = q;
        gof.frames.emplace_back();
        gof.frames[0].kind = FrameKind::keyframe;
        gof.frames[0].basis_or_residual = MultiResBasis(std::move(lvls));
        const int cn = 2 + static_cast<int>(rng.below(3));
        gof.frames[0].coeff =
            FeatureGrid(cn, cn, cn, gof.frames[0].basis_or_residual.total_channels(), bounds);
        gof.frames[0].coeff.fill_uniform(rng, -1.0, 1.0);
        if (rng.below(2)) {  // sometimes add a residual frame
            FrameRepresentation r;
            r.kind = FrameKind::residual;
            r.frame_index = 2;
            std::vector<FeatureGrid> rl;
            for (const auto& l : gof.frames[0].basis_or_residual.levels) {
                FeatureGrid g(l.nx, l.ny, l.nz, l.channels, bounds);
                g.fill_uniform(rng, -0.2, 0.2);
                rl.push_back(std::move(g));
            }
            r.basis_or_residual = MultiResBasis(std::move(rl));
            r.coeff = gof.frames[0].coeff;
            gof.frames.push_back(std::move(r));
        }
        gof.net = ShadingNetwork(gof.frames[0].basis_or_residual.total_channels(), 4, 1, rng);
        for (int l = 0; l < levels; ++l) gof.basis_models.emplace_back(ch, rng);
        gof.coeff_model = EntropyModel(gof.frames[0].coeff.channels, rng);

        auto decoded = decode_gof(encode_gof(gof));
        const QuantConfig qc(q);
        for (std::size_t t = 0; t < gof.frames.size(); ++t) {
            auto check = [&](const FeatureGrid& src, const FeatureGrid& dec) {
                auto want = dequantize_grid(quantize_grid(src, qc));
                if (want.data != dec.data) return false;
                for (std::size_t i = 0; i < src.data.size(); ++i)
                    if (std::abs(dec.data[i] - src.data[i]) > 0.5 / q + 1e-12) return false;
                return true;
            };
            for (int l = 0; l < levels; ++l)
                if (!check(gof.frames[t].basis_or_residual.levels[l],
                           decoded.frames[t].basis_or_residual.levels[l])) {
                    out = "mismatch at fuzz iteration " + std::to_string(iter);
                    return false;
                }
            if (!check(gof.frames[t].coeff, decoded.frames[t].coeff)) {
                out = "coeff mismatch at fuzz iteration " + std::to_string(iter);
                return false;
            }
        }
    }
    out = "1000 fuzzed GOFs bit-exact, max error <= 1/(2q)";
    return true;
}

bool criterion_rate_fidelity(const KeyframeTrainResult& key, Real q, std::string& out) {
    Real worst = 0;
    auto check_grid = [&](const FeatureGrid& g, const EntropyModel& m) {
        const Real est = grid_estimate_bits(g, m, q);
        const Real real_bits = 8.0 * grid_payload_bytes(g, m, q);
        worst = std::max(worst, real_bits - est);
        return real_bits <= est * 1.02 + 64.0 * 8.0;
    };
    for (int l = 0; l < key.frame.basis_or_residual.level_count(); ++l)
        if (!check_grid(key.frame.basis_or_residual.levels[l], key.basis_models[l])) {
            out = "basis level " + std::to_string(l) + " payload exceeds estimate + slack";
            return false;
        }
    if (!check_grid(key.frame.coeff, key.coeff_model)) {
        out = "coeff payload exceeds estimate + slack";
        return false;
    }
    std::ostringstream os;
    os << "worst payload-minus-estimate gap " << worst << " bits (slack 2% + 512 bits)";
    out = os.str();
    return true;
}

/// Forward evaluation of the full objective used by the gradient check:
/// photometric MSE + lambda1 * Eq.-8 rate (noise-free) + lambda2 * mean|R|.
Real pipeline_loss(const FrameRepresentation& frame, const MultiResBasis& kb,
                   const ShadingNetwork& net, const std::vector<EntropyModel>& bm,
                   const EntropyModel& cm, const std::vector<detail::RayTask>& batch,
                   const RenderConfig& rc, Real q, Real lambda1, Real lambda2) {
    Real mse = 0;
    for (const auto& task : batch) {
        Ray ray = task.ray;
        Real t0, t1;
        std::array<Real, 3> rendered = rc.background;
        if (frame.coeff.bounds.intersect(ray.origin, ray.direction, t0, t1) && t1 > t0) {
            ray.near = t0;
            ray.far = t1;
            RandomStream unused(0);
            auto samples = sample_ray(ray, rc.samples_per_ray, false, unused);
            std::vector<FieldSample> fields(samples.t.size());
            for (std::size_t i = 0; i < samples.t.size(); ++i)
                fields[i] = query_field(frame, kb, net, samples.position[i], ray.direction);
            auto rad = render_ray(samples, fields);
            Real wsum = 0;
            for (Real w : rad.weight) wsum += w;
            for (int k = 0; k < 3; ++k) rendered[k] = rad.rgb[k] + (1 - wsum) * rc.background[k];
        }
        for (int k = 0; k < 3; ++k) {
            const Real e = rendered[k] - task.target[k];
            mse += e * e;
        }
    }
    mse /= batch.size();

    Real rate = 0;
    std::size_t res_total = 0;
    for (const auto& l : frame.basis_or_residual.levels) res_total += l.size();
    for (std::size_t l = 0; l < frame.basis_or_residual.levels.size(); ++l) {
        const auto& g = frame.basis_or_residual.levels[l];
        Real bits = 0;
        for (std::size_t i = 0; i < g.data.size(); ++i)
            bits += -std::log2(bm[l].pmf(static_cast<int>(i % g.channels), q * g.data[i]));
        rate += bits / res_total;
    }
    {
        Real bits = 0;
        for (std::size_t i = 0; i < frame.coeff.data.size(); ++i)
            bits += -std::log2(
                cm.pmf(static_cast<int>(i % frame.coeff.channels), q * frame.coeff.data[i]));
        rate += bits / frame.coeff.data.size();
    }

    Real l1 = 0;
    if (frame.kind == FrameKind::residual) {
        std::size_t n = 0;
        for (const auto& g : frame.basis_or_residual.levels)
            for (Real v : g.data) {
                l1 += std::abs(v);
                ++n;
            }
        l1 /= n;
    }
    return mse + lambda1 * rate + lambda2 * l1;
}

bool criterion_gradients(std::string& out) {
    const Real lambda1 = 1e-3, lambda2 = 1e-3, q = 10;
    const Real h = 1e-5;
    Real worst = 0;
    for (int cfg_i = 0; cfg_i < 20; ++cfg_i) {
        RandomStream rng(1000 + cfg_i);
        Bounds bounds({-1, -1, -1}, {1, 1, 1});
        const bool residual = cfg_i % 2 == 1;

        FrameRepresentation frame;
        frame.kind = residual ? FrameKind::residual : FrameKind::keyframe;
        std::vector<FeatureGrid> lvls;
        FeatureGrid g0(4, 4, 4, 2, bounds);
        g0.fill_uniform(rng, -0.3, 0.3);
        lvls.push_back(std::move(g0));
        frame.basis_or_residual = MultiResBasis(std::move(lvls));
        frame.coeff = FeatureGrid(4, 4, 4, 2, bounds);
        frame.coeff.fill_uniform(rng, -0.3, 0.3);

        MultiResBasis kb_storage;
        if (residual) {
            std::vector<FeatureGrid> base;
            FeatureGrid b(4, 4, 4, 2, bounds);
            b.fill_uniform(rng, -0.3, 0.3);
            base.push_back(std::move(b));
            kb_storage = MultiResBasis(std::move(base));
        }
        const MultiResBasis& kb = residual ? kb_storage : frame.basis_or_residual;

        ShadingNetwork net(2, 8, 2, rng);
        std::vector<EntropyModel> bm;
        bm.emplace_back(2, rng);
        EntropyModel cm(2, rng);

        std::vector<detail::RayTask> batch(3);
        for (auto& task : batch) {
            const Real theta = rng.uniform(0, 2 * M_PI), phi = rng.uniform(-0.6, 0.6);
            task.ray.origin = {3 * std::cos(theta) * std::cos(phi), 3 * std::sin(phi),
                               3 * std::sin(theta) * std::cos(phi)};
            Vec3 to_center = (Vec3{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                                   rng.uniform(-0.2, 0.2)} -
                              task.ray.origin);
            task.ray.direction = to_center.normalized();
            for (auto& c : task.target) c = rng.uniform(0.0, 1.0);
        }
        RenderConfig rc;
        rc.samples_per_ray = 8;
        rc.jitter = false;
        rc.background = {0.1, 0.2, 0.3};

        // analytic gradients, assembled exactly as the trainer does
        detail::GradBuffers grads =
            detail::GradBuffers::like(frame.basis_or_residual, frame.coeff, net, !residual);
        std::vector<Real> dmodel_b(bm[0].params().size(), 0.0);
        std::vector<Real> dmodel_c(cm.params().size(), 0.0);
        detail::render_batch_backward(frame, kb, net, batch, rc, 0, !residual, grads, 1);
        {
            std::vector<Real> scaled;
            RandomStream sub(0);
            std::size_t res_total = frame.basis_or_residual.levels[0].size();
            scaled.resize(res_total);
            for (std::size_t i = 0; i < res_total; ++i)
                scaled[i] = q * frame.basis_or_residual.levels[0].data[i];
            detail::rate_grad_grid(scaled, 2, bm[0], 0, sub, lambda1, 1.0, q, &grads.basis[0],
                                   &dmodel_b);
            std::vector<Real> cs(frame.coeff.data.size());
            for (std::size_t i = 0; i < cs.size(); ++i) cs[i] = q * frame.coeff.data[i];
            detail::rate_grad_grid(cs, 2, cm, 0, sub, lambda1, 1.0, q, &grads.coeff, &dmodel_c);
        }
        if (residual) {
            auto& data = frame.basis_or_residual.levels[0].data;
            for (std::size_t i = 0; i < data.size(); ++i)
                if (data[i] != 0)
                    grads.basis[0][i] += lambda2 * (data[i] > 0 ? 1.0 : -1.0) / data.size();
        }

        auto loss = [&] {
            return pipeline_loss(frame, kb, net, bm, cm, batch, rc, q, lambda1,
                                 residual ? lambda2 : 0.0);
        };
        auto check_param = [&](Real& p, Real analytic) {
            const Real save = p;
            p = save + h;
            const Real up = loss();
            p = save - h;
            const Real dn = loss();
            p = save;
            const Real fd = (up - dn) / (2 * h);
            if (std::abs(fd) < 1e-8 && std::abs(analytic) < 1e-8) return true;
            const Real rel = std::abs(fd - analytic) / std::max({std::abs(fd),
                                                                 std::abs(analytic), 1e-8});
            worst = std::max(worst, rel);
            return rel <= 1e-4;
        };

        for (int k = 0; k < 6; ++k) {
            auto& bd = frame.basis_or_residual.levels[0].data;
            const std::size_t bi = rng.below(bd.size());
            const std::size_t ci = rng.below(frame.coeff.data.size());
            if (!check_param(bd[bi], grads.basis[0][bi]) ||
                !check_param(frame.coeff.data[ci], grads.coeff[ci])) {
                out = "grid gradient mismatch, config " + std::to_string(cfg_i);
                return false;
            }
            const std::size_t mi = rng.below(dmodel_b.size());
            if (!check_param(bm[0].params()[mi], dmodel_b[mi]) ||
                !check_param(cm.params()[mi], dmodel_c[mi])) {
                out = "entropy-model gradient mismatch, config " + std::to_string(cfg_i);
                return false;
            }
            if (!residual) {
                const std::size_t li = rng.below(net.weights.size());
                const std::size_t wi = rng.below(net.weights[li].size());
                if (!check_param(net.weights[li][wi], grads.net_w[li][wi])) {
                    out = "network gradient mismatch, config " + std::to_string(cfg_i);
                    return false;
                }
            }
        }
    }
    std::ostringstream os;
    os << "20 random 4^3 configs, worst relative error " << worst;
    out = os.str();
    return true;
}

bool criterion_renderer_oracle(std::string& out) {
    const int n = 256;
    const Real sigma = 2.3, L = 1.0;
    const std::array<Real, 3> c{0.2, 0.5, 0.7};
    RaySamples s;
    s.t.resize(n);
    s.delta.assign(n, L / n);
    s.position.resize(n);
    for (int i = 0; i < n; ++i) s.t[i] = (i + 0.5) * L / n;
    std::vector<FieldSample> fields(n);
    for (auto& f : fields) {
        f.rgb = c;
        f.density = sigma;
    }
    auto rad = render_ray(s, fields);
    for (int k = 0; k < 3; ++k)
        if (std::abs(rad.rgb[k] - c[k] * (1 - std::exp(-sigma * L))) > 1e-3) {
            out = "homogeneous-medium radiance off by more than 1e-3";
            return false;
        }

    RandomStream rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const int m = 4 + static_cast<int>(rng.below(60));
        RaySamples rs;
        rs.t.resize(m);
        rs.delta.resize(m);
        rs.position.resize(m);
        std::vector<FieldSample> fs(m);
        Real t = rng.uniform(0.0, 0.5);
        for (int i = 0; i < m; ++i) {
            rs.delta[i] = rng.uniform(0.001, 0.1);
            rs.t[i] = t += rs.delta[i];
            fs[i].density = rng.uniform(0.0, 5.0);
            for (auto& ch : fs[i].rgb) ch = rng.uniform(0.0, 1.0);
        }
        auto r = render_ray(rs, fs);
        Real T = 1.0, wsum = 0;
        for (int i = 0; i < m; ++i) {
            const Real T_next = T * std::exp(-fs[i].density * rs.delta[i]);
            if (T_next > T + 1e-15) {
                out = "transmittance increased along a ray";
                return false;
            }
            if (std::abs(r.weight[i] - (T - T_next)) > 1e-12) {
                out = "rendered weights disagree with transmittance differences";
                return false;
            }
            wsum += r.weight[i];
            T = T_next;
        }
        if (wsum > 1 + 1e-12) {
            out = "weights sum above 1";
            return false;
        }
    }
    out = "homogeneous closed form within 1e-3 at N=256; transmittance monotone on 100 rays";
    return true;
}

struct RdPoint {
    Real q, bytes, psnr;
};

std::vector<RdPoint> g_rd_points;  // filled by criterion 5, reused in output

bool criterion_rd_monotonic(const Dataset& ds, std::string& out) {
    g_rd_points.clear();
    for (Real q : kDefaultQSweep) {
        TrainConfig cfg = desk_config();
        cfg.q = q;
        auto key = train_keyframe(ds, 0, cfg);
        auto bytes = encode_gof(single_frame_gof(key, q));
        auto decoded = decode_gof(bytes);
        auto ev = evaluate_gof(decoded, ds, "train", 64, g_threads);
        g_rd_points.push_back({q, static_cast<Real>(bytes.size()), ev.mean_psnr});
    }
    std::ostringstream os;
    for (const auto& p : g_rd_points)
        os << "q=" << p.q << ":" << p.bytes << "B/" << p.psnr << "dB ";
    out = os.str();
    int inversions = 0;
    for (std::size_t i = 1; i < g_rd_points.size(); ++i) {
        if (g_rd_points[i].bytes < g_rd_points[i - 1].bytes) return false;
        const Real drop = g_rd_points[i - 1].psnr - g_rd_points[i].psnr;
        if (drop > 0.1) return false;
        if (drop > 0) ++inversions;
    }
    return inversions <= 1;
}

bool criterion_joint_ablation(const Dataset& ds, std::string& out) {
    int wins = 0;
    std::ostringstream os;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        // A TrainLog is passed to both runs so the rate bookkeeping consumes
        // the same RNG draws whether or not lambda1 is zero; the pair then
        // shares ray batches and noise and differs only by the rate gradient.
        TrainLog log_j, log_p;
        TrainConfig joint = desk_config();
        joint.seed = seed;
        auto kj = train_keyframe(ds, 0, joint, &log_j);
        auto bytes_j = encode_gof(single_frame_gof(kj, joint.q));
        const Real psnr_j =
            evaluate_gof(decode_gof(bytes_j), ds, "train", 64, g_threads).mean_psnr;

        TrainConfig plain = joint;
        plain.lambda1 = 0;
        plain.lambda1_floor = 0;
        auto kp = train_keyframe(ds, 0, plain, &log_p);
        // post-hoc: fit the entropy models to the trained grids, then encode
        RandomStream rng(seed + 77);
        for (int l = 0; l < kp.frame.basis_or_residual.level_count(); ++l) {
            const auto& g = kp.frame.basis_or_residual.levels[l];
            std::vector<Real> samples(g.data.size());
            for (std::size_t i = 0; i < samples.size(); ++i)
                samples[i] = plain.q * g.data[i] + rng.uniform(-0.5, 0.5);
            fit_entropy_model(kp.basis_models[l], samples, 400, 0.02, 1024, rng);
            round_to_f32(kp.basis_models[l].params());
        }
        {
            std::vector<Real> samples(kp.frame.coeff.data.size());
            for (std::size_t i = 0; i < samples.size(); ++i)
                samples[i] = plain.q * kp.frame.coeff.data[i] + rng.uniform(-0.5, 0.5);
            fit_entropy_model(kp.coeff_model, samples, 400, 0.02, 1024, rng);
            round_to_f32(kp.coeff_model.params());
        }
        auto bytes_p = encode_gof(single_frame_gof(kp, plain.q));
        const Real psnr_p =
            evaluate_gof(decode_gof(bytes_p), ds, "train", 64, g_threads).mean_psnr;

        const bool win = bytes_j.size() < bytes_p.size() && psnr_j >= psnr_p - 0.5;
        wins += win;
        os << "seed" << seed << ": joint " << bytes_j.size() << "B/" << psnr_j
           << "dB vs plain " << bytes_p.size() << "B/" << psnr_p << "dB "
           << (win ? "(win) " : "(loss) ");
    }
    out = os.str() + "-> " + std::to_string(wins) + "/3";
    return wins >= 2;
}

bool criterion_residual_ablation(const Dataset& ds10, std::string& out) {
    TrainConfig gof_cfg = desk_config();
    gof_cfg.gof_length = 10;
    auto seq = train_sequence(ds10, gof_cfg);
    std::size_t gof_bytes = 0;
    for (const auto& b : seq.bitstreams) gof_bytes += b.size();
    Real gof_psnr = 0;
    {
        auto decoded = decode_gof(seq.bitstreams.at(0));
        gof_psnr = evaluate_gof(decoded, ds10, "test", 64, g_threads).mean_psnr;
    }

    TrainConfig ind_cfg = desk_config();
    ind_cfg.gof_length = 1;  // every frame becomes an independently coded keyframe
    auto ind = train_sequence(ds10, ind_cfg);
    std::size_t ind_bytes = 0;
    Real ind_psnr = 0;
    for (std::size_t g = 0; g < ind.bitstreams.size(); ++g) {
        ind_bytes += ind.bitstreams[g].size();
        auto decoded = decode_gof(ind.bitstreams[g]);
        ind_psnr += evaluate_gof(decoded, ds10, "test", 64, g_threads, static_cast<int>(g))
                        .mean_psnr;
    }
    ind_psnr /= ind.bitstreams.size();

    std::ostringstream os;
    os << "GOF " << gof_bytes << "B/" << gof_psnr << "dB vs independent " << ind_bytes << "B/"
       << ind_psnr << "dB (ratio " << static_cast<Real>(gof_bytes) / ind_bytes << ")";
    out = os.str();
    return gof_bytes <= 0.7 * ind_bytes && gof_psnr >= ind_psnr - 0.5;
}

bool criterion_entropy_calibration(std::string& out) {
    RandomStream rng(21);
    EntropyModel model(1, rng);
    std::vector<Real> samples(20000);
    for (Real& s : samples)
        s = static_cast<Real>(static_cast<std::int64_t>(rng.below(4)) - 2) +
            rng.uniform(-0.5, 0.5);
    fit_entropy_model(model, samples, 600, 0.02, 1024, rng);
    Real bits = 0;
    for (int sym = -2; sym <= 1; ++sym)
        bits += 0.25 * -std::log2(model.pmf(0, static_cast<Real>(sym)));
    std::ostringstream os;
    os << "cross-entropy " << bits << " bits/symbol vs 2.0 ideal";
    out = os.str();
    return bits >= 2.0 - 1e-9 && bits <= 2.1;
}

bool criterion_range_coder(std::string& out) {
    RandomStream rng(31);
    const int n = 10000;
    std::vector<std::uint32_t> symbols(n);
    for (auto& s : symbols) {
        const Real u = rng.uniform();
        s = u < 0.5 ? 0 : (u < 0.75 ? 1 : 2);
    }
    auto table = FrequencyTable::from_weights({0.5, 0.25, 0.25});
    auto payload = range_encode(symbols, {table});
    Real shannon = 0;
    const Real probs[] = {0.5, 0.25, 0.25};
    for (auto s : symbols) shannon += -std::log2(probs[s]);
    std::ostringstream os;
    os << payload.size() << " bytes vs Shannon " << shannon / 8 << " bytes";
    out = os.str();
    if (8.0 * payload.size() > shannon * 1.01 + 64) return false;
    return range_decode(payload, {table}, n) == symbols;
}

bool criterion_config_fidelity(const char* cli_path, std::string& out) {
    TrainConfig cfg;
    if (kDefaultQSweep != std::array<Real, 4>{1, 2, 5, 10}) {
        out = "default q sweep is not {1,2,5,10}";
        return false;
    }
    if (cfg.gof_length != 10 || cfg.lambda1 != 1e-6 || cfg.lambda2 != 1e-6) {
        out = "default GOF length or lambdas drifted";
        return false;
    }
    if (cfg.basis_resolutions.size() + 1 != 7) {  // 6 basis models + 1 coeff model
        out = "default entropy-model count is not 7";
        return false;
    }
    out = "q sweep {1,2,5,10}, GOF 10, lambda1=lambda2=1e-6, 7 entropy models";
    if (cli_path) {
        const std::string cmd = std::string("\"") + cli_path + "\" --help > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) {
            out = "CLI binary failed to run --help";
            return false;
        }
        out += "; CLI --help ok";
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const char* cli_path = argc > 1 ? argv[1] : nullptr;
    g_threads = pick_threads();

    const fs::path work = fs::temp_directory_path() / "jointrf_acceptance";
    fs::remove_all(work);
    std::printf("building toy datasets (threads=%d)...\n", g_threads);
    std::fflush(stdout);
    Dataset ds1 = make_dataset(1, work / "one_frame");
    Dataset ds10 = make_dataset(10, work / "ten_frames");

    // Shared trained keyframe for the rate-fidelity criterion.
    TrainConfig shared_cfg = desk_config();
    auto shared_key = train_keyframe(ds1, 0, shared_cfg);

    struct Criterion {
        int id;
        const char* name;
        std::function<bool(std::string&)> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "codec losslessness (1000-case fuzz)", criterion_codec_lossless},
        {2, "rate-estimate fidelity vs real coder",
         [&](std::string& d) { return criterion_rate_fidelity(shared_key, shared_cfg.q, d); }},
        {3, "end-to-end gradient correctness", criterion_gradients},
        {4, "renderer analytic oracle", criterion_renderer_oracle},
        {5, "RD monotonicity over q sweep",
         [&](std::string& d) { return criterion_rd_monotonic(ds1, d); }},
        {6, "joint-optimization ablation (3 seeds)",
         [&](std::string& d) { return criterion_joint_ablation(ds1, d); }},
        {7, "residual-representation ablation",
         [&](std::string& d) { return criterion_residual_ablation(ds10, d); }},
        {8, "entropy-model calibration", criterion_entropy_calibration},
        {9, "range-coder efficiency vs Shannon bound", criterion_range_coder},
        {10, "config fidelity",
         [&](std::string& d) { return criterion_config_fidelity(cli_path, d); }},
    };

    std::vector<int> only;  // optional argv[2]: comma-separated criterion ids
    if (argc > 2) {
        std::stringstream ss(argv[2]);
        for (std::string tok; std::getline(ss, tok, ',');) only.push_back(std::stoi(tok));
    }

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
        std::printf("[%s] criterion %d: %s — %s (%.1fs)\n", ok ? "PASS" : "FAIL", c.id, c.name,
                    detail.c_str(), secs.count());
        std::fflush(stdout);
        failures += !ok;
    }
    fs::remove_all(work);
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures ? 1 : 0;
}
