// jointrf command-line front end: scene synthesis, training, encode/decode,
// rendering, evaluation, and rate-distortion sweeps over .gof bitstreams.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "jointrf/eval.hpp"
#include "jointrf/trainer.hpp"

namespace fs = std::filesystem;
using namespace jointrf;

namespace {

int default_threads() {
    if (const char* env = std::getenv("JOINTRF_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// The stock two-sphere-and-box dynamic scene used by `synth`.
SyntheticScene default_scene(int frames) {
    SyntheticScene scene;
    scene.bounds = Bounds({-1, -1, -1}, {1, 1, 1});
    scene.frame_count = frames;
    Primitive moving;
    moving.kind = Primitive::Kind::sphere;
    moving.center = {-0.25, 0.0, -0.1};
    moving.velocity = {0.04, 0.0, 0.02};
    moving.radius = 0.35;
    moving.color = {0.9, 0.3, 0.25};
    moving.density = 30;
    Primitive box;
    box.kind = Primitive::Kind::box;
    box.center = {0.35, -0.3, 0.3};
    box.half_extent = {0.25, 0.25, 0.25};
    box.color = {0.2, 0.5, 0.9};
    box.density = 25;
    Primitive drift;
    drift.kind = Primitive::Kind::sphere;
    drift.center = {-0.3, 0.4, 0.3};
    drift.velocity = {0.0, -0.03, 0.0};
    drift.radius = 0.18;
    drift.color = {0.3, 0.85, 0.4};
    drift.density = 30;
    scene.primitives = {moving, box, drift};
    return scene;
}

void apply_config_file(TrainConfig& cfg, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path);
    nlohmann::json j;
    f >> j;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
    };
    get("lambda1", cfg.lambda1);
    get("lambda2", cfg.lambda2);
    get("lambda1_floor", cfg.lambda1_floor);
    get("q", cfg.q);
    get("gof_length", cfg.gof_length);
    get("lr_grids", cfg.lr_grids);
    get("lr_net", cfg.lr_net);
    get("lr_entropy", cfg.lr_entropy);
    get("keyframe_iters", cfg.keyframe_iters);
    get("residual_iters", cfg.residual_iters);
    get("rays_per_batch", cfg.rays_per_batch);
    get("samples_per_ray", cfg.samples_per_ray);
    get("seed", cfg.seed);
    get("basis_channels", cfg.basis_channels);
    get("hidden_width", cfg.hidden_width);
    get("hidden_layers", cfg.hidden_layers);
    get("rate_subsample", cfg.rate_subsample);
    get("warm_start_coeff", cfg.warm_start_coeff);
    get("simulate_quantization", cfg.simulate_quantization);
    if (j.contains("basis_resolutions"))
        cfg.basis_resolutions = j["basis_resolutions"].get<std::vector<std::array<int, 3>>>();
    if (j.contains("coeff_resolution"))
        cfg.coeff_resolution = j["coeff_resolution"].get<std::array<int, 3>>();
}

struct TrainOutputs {
    std::vector<fs::path> gof_paths;
    std::vector<Real> frame_psnr;  // train split, decode path
    std::vector<std::size_t> frame_bytes;
};

/// Train, encode, and evaluate a whole sequence; writes .gof files, the
/// iteration CSV, and a per-frame summary CSV.
TrainOutputs run_training(const Dataset& ds, const TrainConfig& cfg, const fs::path& out_dir,
                          int eval_samples) {
    fs::create_directories(out_dir);
    SequenceResult seq = train_sequence(ds, cfg);
    seq.log.write_csv((out_dir / "training_log.csv").string());

    TrainOutputs out;
    std::ofstream summary(out_dir / "summary.csv");
    summary << "frame,gof,chunk_bytes,train_psnr\n";
    summary.precision(12);
    int frame0 = 0;
    for (std::size_t g = 0; g < seq.bitstreams.size(); ++g) {
        fs::path path = out_dir / ("gof_" + std::to_string(g) + ".gof");
        write_file(path.string(), seq.bitstreams[g]);
        out.gof_paths.push_back(path);

        GofReader reader(std::make_shared<MemoryByteSource>(seq.bitstreams[g]));
        GofRepresentation decoded = reader.decode_all();
        EvalResult ev = evaluate_gof(decoded, ds, "train", eval_samples, cfg.threads, frame0);
        for (std::size_t t = 0; t < decoded.frames.size(); ++t) {
            out.frame_psnr.push_back(ev.frame_psnr[t]);
            out.frame_bytes.push_back(reader.layout().chunk_length[t]);
            summary << (frame0 + static_cast<int>(t)) << "," << g << ","
                    << reader.layout().chunk_length[t] << "," << ev.frame_psnr[t] << "\n";
        }
        frame0 += static_cast<int>(decoded.frames.size());
    }
    return out;
}

void write_rd_svg(const std::vector<RdPoint>& pts, const std::string& path) {
    // Minimal polyline plot: size (KB) on x, PSNR on y.
    Real xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.bytes / 1024);
        xmax = std::max(xmax, p.bytes / 1024);
        ymin = std::min(ymin, p.psnr);
        ymax = std::max(ymax, p.psnr);
    }
    const Real xpad = std::max<Real>(0.05 * (xmax - xmin), 0.5);
    const Real ypad = std::max<Real>(0.05 * (ymax - ymin), 0.5);
    xmin -= xpad; xmax += xpad; ymin -= ypad; ymax += ypad;
    const int W = 640, H = 480, M = 56;
    auto X = [&](Real v) { return M + (v - xmin) / (xmax - xmin) * (W - 2 * M); };
    auto Y = [&](Real v) { return H - M - (v - ymin) / (ymax - ymin) * (H - 2 * M); };
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<line x1='" << M << "' y1='" << H - M << "' x2='" << W - M << "' y2='" << H - M
      << "' stroke='black'/>\n"
      << "<line x1='" << M << "' y1='" << M << "' x2='" << M << "' y2='" << H - M
      << "' stroke='black'/>\n"
      << "<text x='" << W / 2 << "' y='" << H - 16 << "' text-anchor='middle'>size (KB)</text>\n"
      << "<text x='16' y='" << H / 2 << "' transform='rotate(-90 16 " << H / 2
      << ")' text-anchor='middle'>PSNR (dB)</text>\n";
    f << "<polyline fill='none' stroke='steelblue' stroke-width='2' points='";
    for (const auto& p : pts) f << X(p.bytes / 1024) << "," << Y(p.psnr) << " ";
    f << "'/>\n";
    for (const auto& p : pts) {
        f << "<circle cx='" << X(p.bytes / 1024) << "' cy='" << Y(p.psnr)
          << "' r='4' fill='steelblue'/>\n";
        f << "<text x='" << X(p.bytes / 1024) + 8 << "' y='" << Y(p.psnr) - 8 << "'>q="
          << p.label << "</text>\n";
    }
    f << "</svg>\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"JointRF: jointly optimized dynamic radiance-field representation + compression"};
    app.require_subcommand(1);

    int threads = default_threads();
    app.add_option("--threads", threads, "worker threads (1 = fully reproducible)");

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic posed-image dataset");
    std::string synth_out = "dataset";
    int synth_frames = 10, train_cams = 20, test_cams = 4, size = 128, gt_samples = 256;
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--frames", synth_frames, "frame count")->check(CLI::PositiveNumber);
    synth->add_option("--train-cams", train_cams)->check(CLI::PositiveNumber);
    synth->add_option("--test-cams", test_cams)->check(CLI::NonNegativeNumber);
    synth->add_option("--size", size, "image width = height")->check(CLI::PositiveNumber);
    synth->add_option("--gt-samples", gt_samples, "ground-truth samples per ray");

    // ---- train ----
    auto* train = app.add_subcommand("train", "train a sequence and encode .gof files");
    std::string train_data, train_out = "out", config_path;
    TrainConfig cfg;
    train->add_option("--data", train_data, "dataset manifest.json")->required();
    train->add_option("--out", train_out, "output directory");
    train->add_option("--config", config_path, "JSON training config");
    double q_flag = -1, l1_flag = -1, l2_flag = -1;
    int gof_flag = -1, ik_flag = -1, ir_flag = -1, rays_flag = -1, samples_flag = -1;
    std::int64_t seed_flag = -1;
    train->add_option("--q", q_flag, "quantization parameter");
    train->add_option("--gof-len", gof_flag, "frames per GOF (default 10)");
    train->add_option("--lambda1", l1_flag, "rate weight (default 1e-6)");
    train->add_option("--lambda2", l2_flag, "residual L1 weight (default 1e-6)");
    train->add_option("--iters-keyframe", ik_flag);
    train->add_option("--iters-residual", ir_flag);
    train->add_option("--rays", rays_flag, "rays per batch");
    train->add_option("--samples", samples_flag, "samples per ray");
    train->add_option("--seed", seed_flag);

    // ---- decode ----
    auto* decode = app.add_subcommand("decode", "decode a .gof into grids or renders");
    std::string dec_in, dec_out = "decoded", dec_data;
    bool dec_render = false;
    int dec_view = 0, dec_samples = 128;
    decode->add_option("--in", dec_in, ".gof file")->required();
    decode->add_option("--out", dec_out, "output directory");
    decode->add_flag("--render", dec_render, "also render every frame");
    decode->add_option("--data", dec_data, "manifest (for cameras when rendering)");
    decode->add_option("--view", dec_view, "camera index for --render");
    decode->add_option("--samples", dec_samples);

    // ---- render ----
    auto* render = app.add_subcommand("render", "render one frame of a .gof");
    std::string ren_in, ren_data, ren_out = "render.png";
    int ren_frame = 0, ren_view = 0, ren_samples = 128;
    render->add_option("--in", ren_in, ".gof file")->required();
    render->add_option("--data", ren_data, "manifest providing the camera")->required();
    render->add_option("--frame", ren_frame, "frame index within the GOF");
    render->add_option("--view", ren_view, "camera index");
    render->add_option("--out", ren_out, "output image (.png or .ppm)");
    render->add_option("--samples", ren_samples);

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "PSNR/SSIM of .gof files against a dataset");
    std::vector<std::string> eval_in;
    std::string eval_data, eval_split = "train", eval_out;
    int eval_samples = 128;
    eval_cmd->add_option("--in", eval_in, ".gof files in sequence order")->required();
    eval_cmd->add_option("--data", eval_data, "dataset manifest")->required();
    eval_cmd->add_option("--split", eval_split)->check(CLI::IsMember({"train", "test"}));
    eval_cmd->add_option("--samples", eval_samples);
    eval_cmd->add_option("--out", eval_out, "write CSV here instead of stdout");

    // ---- rdcurve ----
    auto* rd = app.add_subcommand("rdcurve", "rate-distortion sweep over q values");
    std::string rd_data, rd_out = "rd";
    std::vector<double> rd_qs(kDefaultQSweep.begin(), kDefaultQSweep.end());
    std::string rd_config;
    std::string rd_split = "train";
    rd->add_option("--data", rd_data, "dataset manifest")->required();
    rd->add_option("--out", rd_out, "output directory");
    rd->add_option("--qs", rd_qs, "q values to sweep");
    rd->add_option("--config", rd_config, "JSON training config");
    rd->add_option("--split", rd_split)->check(CLI::IsMember({"train", "test"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (*synth) {
            auto scene = default_scene(synth_frames);
            const Real focal = 0.9 * size;
            auto train_cams_v = orbit_cameras(train_cams, 3.2, {0, 0, 0}, size, size, focal);
            auto test_cams_v = orbit_cameras(test_cams ? test_cams : 1, 2.9, {0, 0, 0}, size,
                                             size, focal);
            if (!test_cams) test_cams_v.clear();
            generate_scene(scene, train_cams_v, test_cams_v, synth_out, gt_samples);
            std::cout << "wrote dataset to " << synth_out << "\n";
        } else if (*train) {
            if (!config_path.empty()) apply_config_file(cfg, config_path);
            if (q_flag > 0) cfg.q = q_flag;
            if (gof_flag > 0) cfg.gof_length = gof_flag;
            if (l1_flag >= 0) cfg.lambda1 = l1_flag;
            if (l2_flag >= 0) cfg.lambda2 = l2_flag;
            if (ik_flag > 0) cfg.keyframe_iters = ik_flag;
            if (ir_flag > 0) cfg.residual_iters = ir_flag;
            if (rays_flag > 0) cfg.rays_per_batch = rays_flag;
            if (samples_flag > 0) cfg.samples_per_ray = samples_flag;
            if (seed_flag >= 0) cfg.seed = static_cast<std::uint64_t>(seed_flag);
            cfg.threads = threads;
            Dataset ds = load_manifest(train_data);
            auto outputs = run_training(ds, cfg, train_out, cfg.samples_per_ray);
            std::cout << "wrote " << outputs.gof_paths.size() << " GOF file(s) to " << train_out
                      << "\n";
        } else if (*decode) {
            GofReader reader(std::make_shared<FileByteSource>(dec_in));
            GofRepresentation g = reader.decode_all();
            fs::create_directories(dec_out);
            nlohmann::json index;
            index["frames"] = g.frames.size();
            index["q"] = g.q;
            for (std::size_t t = 0; t < g.frames.size(); ++t) {
                auto dump = [&](const FeatureGrid& grid, const std::string& name) {
                    std::ofstream f(fs::path(dec_out) / name, std::ios::binary);
                    for (Real v : grid.data) {
                        float x = static_cast<float>(v);
                        f.write(reinterpret_cast<const char*>(&x), 4);
                    }
                    index["grids"].push_back({{"file", name},
                                              {"frame", t},
                                              {"shape", {grid.nx, grid.ny, grid.nz, grid.channels}}});
                };
                for (int l = 0; l < g.frames[t].basis_or_residual.level_count(); ++l)
                    dump(g.frames[t].basis_or_residual.levels[l],
                         "frame" + std::to_string(t) + "_basis" + std::to_string(l) + ".f32");
                dump(g.frames[t].coeff, "frame" + std::to_string(t) + "_coeff.f32");
            }
            std::ofstream(fs::path(dec_out) / "index.json") << index.dump(2) << "\n";
            if (dec_render) {
                if (dec_data.empty()) throw std::runtime_error("--render needs --data");
                Dataset ds = load_manifest(dec_data);
                RenderConfig rc;
                rc.samples_per_ray = dec_samples;
                rc.background = ds.background;
                for (std::size_t t = 0; t < g.frames.size(); ++t) {
                    Image img = render_image(g.frames[t], g.keyframe_basis(), g.net,
                                             ds.views.at(dec_view).camera, rc, 0, threads);
                    write_png(img, (fs::path(dec_out) / ("frame" + std::to_string(t) + ".png"))
                                       .string());
                }
            }
            std::cout << "decoded " << g.frames.size() << " frame(s) to " << dec_out << "\n";
        } else if (*render) {
            GofReader reader(std::make_shared<FileByteSource>(ren_in));
            if (ren_frame < 0 || ren_frame >= reader.frame_count())
                throw std::runtime_error("frame index out of range");
            Dataset ds = load_manifest(ren_data);
            FrameRepresentation key = reader.decode_frame(0);
            FrameRepresentation frame = ren_frame == 0 ? key : reader.decode_frame(ren_frame);
            RenderConfig rc;
            rc.samples_per_ray = ren_samples;
            rc.background = ds.background;
            Image img = render_image(frame, key.basis_or_residual, reader.net(),
                                     ds.views.at(ren_view).camera, rc, 0, threads);
            if (ren_out.size() > 4 && ren_out.substr(ren_out.size() - 4) == ".ppm")
                write_ppm(img, ren_out);
            else
                write_png(img, ren_out);
            std::cout << "wrote " << ren_out << "\n";
        } else if (*eval_cmd) {
            Dataset ds = load_manifest(eval_data);
            std::ostringstream csv;
            csv.precision(12);
            csv << "frame,psnr,ssim\n";
            int frame0 = 0;
            Real psum = 0, ssum = 0;
            int n = 0;
            for (const auto& path : eval_in) {
                GofReader reader(std::make_shared<FileByteSource>(path));
                GofRepresentation g = reader.decode_all();
                EvalResult ev = evaluate_gof(g, ds, eval_split, eval_samples, threads, frame0);
                for (std::size_t t = 0; t < ev.frame_psnr.size(); ++t) {
                    csv << (frame0 + static_cast<int>(t)) << "," << ev.frame_psnr[t] << ","
                        << ev.frame_ssim[t] << "\n";
                    psum += ev.frame_psnr[t];
                    ssum += ev.frame_ssim[t];
                    ++n;
                }
                frame0 += reader.frame_count();
            }
            csv << "mean," << psum / n << "," << ssum / n << "\n";
            if (eval_out.empty())
                std::cout << csv.str();
            else
                std::ofstream(eval_out) << csv.str();
        } else if (*rd) {
            TrainConfig base;
            if (!rd_config.empty()) apply_config_file(base, rd_config);
            base.threads = threads;
            Dataset ds = load_manifest(rd_data);
            fs::create_directories(rd_out);
            std::vector<RdPoint> pts;
            std::ofstream csv(fs::path(rd_out) / "rd.csv");
            csv << "label,bytes,psnr,ssim\n";
            csv.precision(12);
            for (double q : rd_qs) {
                TrainConfig c = base;
                c.q = q;
                fs::path qdir = fs::path(rd_out) / ("q" + std::to_string(q));
                auto outputs = run_training(ds, c, qdir, c.samples_per_ray);
                std::size_t bytes = 0;
                for (const auto& p : outputs.gof_paths) bytes += fs::file_size(p);
                // Metrics from the decode path on the requested split.
                Real psum = 0, ssum = 0;
                int n = 0, frame0 = 0;
                for (const auto& p : outputs.gof_paths) {
                    GofReader reader(std::make_shared<FileByteSource>(p.string()));
                    auto ev = evaluate_gof(reader.decode_all(), ds, rd_split,
                                           c.samples_per_ray, threads, frame0);
                    psum += ev.mean_psnr * ev.frame_psnr.size();
                    ssum += ev.mean_ssim * ev.frame_ssim.size();
                    n += static_cast<int>(ev.frame_psnr.size());
                    frame0 += static_cast<int>(ev.frame_psnr.size());
                }
                RdPoint pt;
                pt.bytes = static_cast<Real>(bytes);
                pt.psnr = psum / n;
                pt.ssim = ssum / n;
                pt.label = std::to_string(q);
                pts.push_back(pt);
                csv << pt.label << "," << pt.bytes << "," << pt.psnr << "," << pt.ssim << "\n";
            }
            write_rd_svg(pts, (fs::path(rd_out) / "rd.svg").string());
            std::cout << "wrote RD sweep to " << rd_out << "\n";
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
