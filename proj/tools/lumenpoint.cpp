/*
 * Copyright (C) 2026 The Lumenpoint Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// lumenpoint: command-line front end. Every pipeline stage is a subcommand;
// `pipeline` chains unproject -> transform -> infer in one process and writes
// the same bytes as running the stages one at a time.

#include "lumenpoint/dataset.hpp"
#include "lumenpoint/error.hpp"
#include "lumenpoint/imaging.hpp"
#include "lumenpoint/io.hpp"
#include "lumenpoint/learner/checkpoint.hpp"
#include "lumenpoint/learner/train.hpp"
#include "lumenpoint/metrics.hpp"
#include "lumenpoint/parallel.hpp"
#include "lumenpoint/point_cloud.hpp"
#include "lumenpoint/sph.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#ifndef LUMENPOINT_VERSION
#define LUMENPOINT_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace lumenpoint;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kInternal = 4 };

struct Globals {
    std::uint64_t seed = 0;
    int threads = 0;
};

struct Intrinsics {
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;

    void add_to(CLI::App* app) {
        app->add_option("--fx", fx, "Focal length along x (pixels)")->required();
        app->add_option("--fy", fy, "Focal length along y (pixels)")->required();
        app->add_option("--cx", cx, "Principal point x (pixels)")->required();
        app->add_option("--cy", cy, "Principal point y (pixels)")->required();
    }
    CameraIntrinsics get() const { return {fx, fy, cx, cy}; }
};

// Observation input: PNG pair or .rgbd container.
struct ImageInput {
    std::string color, depth, rgbd;
    bool srgb = false;

    void add_to(CLI::App* app) {
        auto* c = app->add_option("--color", color, "8-bit RGB(A) PNG")->check(CLI::ExistingFile);
        auto* d = app->add_option("--depth", depth, "16-bit depth PNG in millimeters")->check(CLI::ExistingFile);
        auto* r = app->add_option("--rgbd", rgbd, ".rgbd container instead of PNGs")->check(CLI::ExistingFile);
        c->needs(d);
        d->needs(c);
        r->excludes(c)->excludes(d);
        app->add_flag("--srgb", srgb, "Decode PNG color from sRGB to linear");
    }
    RgbdImage load() const {
        if (!rgbd.empty()) return io::read_rgbd(rgbd);
        if (color.empty()) throw CLI::RequiredError("--color/--depth or --rgbd");
        return io::read_rgbd_png(color, depth, srgb);
    }
};

struct FillOptions {
    bool no_fill = false;
    DepthFillConfig cfg;

    void add_to(CLI::App* app) {
        app->add_flag("--no-fill", no_fill, "Skip cross-bilateral hole filling");
        app->add_option("--fill-spatial-sigma", cfg.spatial_sigma, "Fill spatial sigma (pixels)")->capture_default_str();
        app->add_option("--fill-range-sigma", cfg.range_sigma, "Fill color sigma (linear RGB)")->capture_default_str();
        app->add_option("--fill-radius", cfg.window_radius, "Fill window radius (pixels)")->capture_default_str();
    }
};

struct TransformOptions {
    double u = 0.0, v = 0.0;
    double scale = 0.95;
    std::string rot;
    std::size_t points = 0;

    void add_to(CLI::App* app) {
        app->add_option("--u", u, "Rendering pixel column")->required();
        app->add_option("--v", v, "Rendering pixel row")->required();
        app->add_option("--scale", scale, "Scale factor toward the target")->capture_default_str();
        app->add_option("--rot", rot, "Rotation JSON (3x3 or {\"rotation\": 3x3}); identity if absent")
            ->check(CLI::ExistingFile);
    }
    RenderingRelation relation() const {
        RenderingRelation rel;
        rel.pixel_uv = {u, v};
        rel.scale_factor = scale;
        rel.rotation = rot.empty() ? Mat3::Identity() : io::read_rotation_json(rot);
        rel.validate();
        return rel;
    }
};

learner::PointConvConfig preset(const std::string& name) {
    if (name == "standard") return learner::PointConvConfig::standard();
    if (name == "toy") return learner::PointConvConfig::toy();
    if (name == "wide") return learner::PointConvConfig::wide();
    throw CLI::ValidationError("--preset", "unknown preset '" + name + "'");
}

const std::vector<std::string> kPresets = {"standard", "toy", "wide"};

// --- stage functions shared by the staged commands and `pipeline` ---------

PointCloud stage_unproject(const RgbdImage& img, const CameraIntrinsics& k, const FillOptions& fill) {
    PointCloud pc = unproject(fill.no_fill ? img : fill_depth(img, fill.cfg), k);
    pc.quantize_to_f32();  // what a write/read of the .lpc would give
    return pc;
}

PointCloud stage_transform(const PointCloud& pc, const RenderingRelation& rel, const CameraIntrinsics& k,
                           double depth, std::size_t points, std::uint64_t seed) {
    PointCloud out = view_transform(pc, rel, k, depth);
    if (points > 0) out = downsample_uniform(out, points, seed);
    out.quantize_to_f32();
    return out;
}

void report(const std::string& what) { std::cerr << what << '\n'; }

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

// Lambertian sphere lit by SH, viewed along +z, linear -> sRGB 8-bit.
std::vector<std::uint8_t> render_sphere(const ShCoefficients& light, int size, double exposure) {
    const ShCoefficients irr = irradiance_sh(light);
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(size) * size * 3, 0);
    auto encode = [&](double x) {
        x = std::clamp(x * exposure, 0.0, 1.0);
        x = x <= 0.0031308 ? 12.92 * x : 1.055 * std::pow(x, 1.0 / 2.4) - 0.055;
        return static_cast<std::uint8_t>(std::lround(x * 255.0));
    };
#pragma omp parallel for schedule(static)
    for (int py = 0; py < size; ++py) {
        for (int px = 0; px < size; ++px) {
            const double x = (px + 0.5) / size * 2.0 - 1.0;
            const double y = (py + 0.5) / size * 2.0 - 1.0;
            const double r2 = x * x + y * y;
            if (r2 >= 1.0) continue;
            // The camera looks along +z, so the visible normals face -z.
            const Vec3 n(x, y, -std::sqrt(1.0 - r2));
            const auto e = sh_evaluate(irr, n.normalized());
            const std::size_t o = (static_cast<std::size_t>(py) * size + px) * 3;
            for (int c = 0; c < 3; ++c) rgb[o + c] = encode(e[c] / std::numbers::pi);
        }
    }
    return rgb;
}

std::vector<learner::TrainingSample> prepare_samples(const std::vector<DatasetTuple>& tuples,
                                                     const learner::PointConvConfig& cfg) {
    std::vector<learner::TrainingSample> samples(tuples.size());
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        try {
            samples[i] = {learner::prepare_cloud(tuples[i].cloud, cfg), tuples[i].sh};
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return samples;
}

// Tuples on one side of the scene split, or all of them for fraction >= 1.
std::vector<DatasetTuple> select(std::vector<DatasetTuple> tuples, double train_fraction, std::uint64_t seed,
                                 bool test_side) {
    if (train_fraction >= 1.0) return tuples;
    const Split sp = split(tuples, train_fraction, seed);
    std::vector<DatasetTuple> out;
    for (std::size_t i : test_side ? sp.test : sp.train) out.push_back(std::move(tuples[i]));
    return out;
}

// First flag on the command line that neither the program nor the chosen
// subcommand knows. CLI11 reports missing required options before extras, so
// this lets a typo be named instead of a downstream "X is required".
std::optional<std::string> unknown_flag(CLI::App& app, int argc, char** argv) {
    CLI::App* sub = nullptr;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg.size() < 2 || arg[0] != '-' || std::isdigit(static_cast<unsigned char>(arg[1])) || arg[1] == '.') {
            if (!sub) {
                try {
                    sub = app.get_subcommand(arg);
                } catch (const CLI::OptionNotFound&) {
                }
            }
            continue;
        }
        if (arg == "--") break;
        if (const auto eq = arg.find('='); eq != std::string::npos) arg.resize(eq);
        if (app.get_option_no_throw(arg)) continue;
        if (sub && sub->get_option_no_throw(arg)) continue;
        if (arg == "-h" || arg == "--help") continue;
        return arg;
    }
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    keep_freed_memory();
    Globals g;
    CLI::App app{"Point-cloud lighting estimation pipeline", "lumenpoint"};
    app.set_version_flag("--version", std::string("lumenpoint ") + LUMENPOINT_VERSION);
    app.set_config("--config", "", "Read options from a TOML/INI file");
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", g.seed, "Seed for every random choice (default 0)");
    app.add_option("--threads", g.threads, "Worker threads, 0 = runtime default; LUMENPOINT_THREADS overrides")
        ->check(CLI::NonNegativeNumber);

    // unproject ---------------------------------------------------------------
    auto* cmd_unproject = app.add_subcommand("unproject", "RGB-D image to camera-frame point cloud (.lpc)");
    ImageInput up_in;
    Intrinsics up_k;
    FillOptions up_fill;
    std::string up_out;
    up_in.add_to(cmd_unproject);
    up_k.add_to(cmd_unproject);
    up_fill.add_to(cmd_unproject);
    cmd_unproject->add_option("--out", up_out, "Output .lpc")->required();

    // transform ---------------------------------------------------------------
    auto* cmd_transform = app.add_subcommand("transform", "Recenter on the rendering position and rotate");
    std::string tf_cloud, tf_out;
    double tf_depth = 0.0;
    Intrinsics tf_k;
    TransformOptions tf;
    cmd_transform->add_option("--cloud", tf_cloud, "Input .lpc")->required()->check(CLI::ExistingFile);
    cmd_transform->add_option("--depth", tf_depth, "Depth at (u, v) in meters")->required();
    tf.add_to(cmd_transform);
    tf_k.add_to(cmd_transform);
    cmd_transform->add_option("--points", tf.points, "Downsample to N points (0 keeps all)")->capture_default_str();
    cmd_transform->add_option("--out", tf_out, "Output .lpc")->required();

    // project -----------------------------------------------------------------
    auto* cmd_project = app.add_subcommand("project", "Point cloud to equirectangular panorama (.pfm)");
    std::string pj_cloud, pj_out;
    int pj_w = 128, pj_h = 64;
    cmd_project->add_option("--cloud", pj_cloud, "Input .lpc")->required()->check(CLI::ExistingFile);
    cmd_project->add_option("--width", pj_w, "Panorama width")->capture_default_str();
    cmd_project->add_option("--height", pj_h, "Panorama height")->capture_default_str();
    cmd_project->add_option("--out", pj_out, "Output .pfm (uncovered pixels hold -1)")->required();

    // sh-project --------------------------------------------------------------
    auto* cmd_shp = app.add_subcommand("sh-project", "Panorama to order-2 SH coefficients");
    std::string shp_pano, shp_out;
    std::size_t shp_mc = 0;
    bool shp_masked = false;
    cmd_shp->add_option("--pano", shp_pano, "Input .pfm")->required()->check(CLI::ExistingFile);
    cmd_shp->add_option("--mc", shp_mc, "Monte-Carlo estimate from N uniform samples (0 = quadrature)")->capture_default_str();
    cmd_shp->add_flag("--masked", shp_masked, "Skip missing pixels and renormalize by covered solid angle");
    cmd_shp->add_option("--out", shp_out, "Output SH JSON")->required();

    // reconstruct -------------------------------------------------------------
    auto* cmd_rec = app.add_subcommand("reconstruct", "Irradiance panorama from radiance SH (.pfm)");
    std::string rec_sh, rec_out;
    int rec_w = 128, rec_h = 64;
    cmd_rec->add_option("--sh", rec_sh, "Radiance SH JSON")->required()->check(CLI::ExistingFile);
    cmd_rec->add_option("--width", rec_w, "Panorama width")->capture_default_str();
    cmd_rec->add_option("--height", rec_h, "Panorama height")->capture_default_str();
    cmd_rec->add_option("--out", rec_out, "Output .pfm")->required();

    // render-probe ------------------------------------------------------------
    auto* cmd_probe = app.add_subcommand("render-probe", "Render a Lambertian sphere lit by SH (.png)");
    std::string probe_sh, probe_out;
    int probe_size = 256;
    double probe_exposure = 1.0;
    cmd_probe->add_option("--sh", probe_sh, "Radiance SH JSON")->required()->check(CLI::ExistingFile);
    cmd_probe->add_option("--size", probe_size, "Image side in pixels")->capture_default_str()->check(CLI::Range(8, 8192));
    cmd_probe->add_option("--exposure", probe_exposure, "Linear exposure multiplier")->capture_default_str();
    cmd_probe->add_option("--out", probe_out, "Output PNG")->required();

    // gen-dataset -------------------------------------------------------------
    auto* cmd_gen = app.add_subcommand("gen-dataset", "Generate synthetic training tuples");
    DatasetInfo gen;
    std::string gen_out;
    gen.scenes = 64;
    gen.tuples_per_scene = 4;
    cmd_gen->add_option("--scenes", gen.scenes, "Number of rooms")->capture_default_str()->check(CLI::PositiveNumber);
    cmd_gen->add_option("--tuples-per-scene", gen.tuples_per_scene, "Views per room")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd_gen->add_option("--points", gen.generation.n_points, "Points per cloud")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd_gen->add_option("--width", gen.generation.image_width, "Observation width (intrinsics scale along)")->capture_default_str();
    cmd_gen->add_option("--height", gen.generation.image_height, "Observation height")->capture_default_str();
    cmd_gen->add_option("--env-width", gen.generation.env_width, "Panorama width")->capture_default_str();
    cmd_gen->add_option("--env-height", gen.generation.env_height, "Panorama height")->capture_default_str();
    cmd_gen->add_option("--out", gen_out, "Output directory")->required();

    // train -------------------------------------------------------------------
    auto* cmd_train = app.add_subcommand("train", "Train the point-cloud regressor");
    std::string tr_data, tr_out, tr_curve, tr_preset = "standard", tr_opt = "adam";
    learner::TrainConfig tr;
    double tr_fraction = 1.0;
    std::size_t tr_log_every = 100;
    cmd_train->add_option("--data", tr_data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    cmd_train->add_option("--steps", tr.steps, "Optimizer steps")->capture_default_str()->check(CLI::PositiveNumber);
    cmd_train->add_option("--lr", tr.learning_rate, "Initial learning rate")->capture_default_str();
    cmd_train->add_option("--final-lr-ratio", tr.final_lr_ratio, "Final / initial learning rate")->capture_default_str();
    cmd_train->add_option("--batch", tr.batch_size, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
    cmd_train->add_option("--optimizer", tr_opt, "adam or sgd")->capture_default_str()->check(CLI::IsMember({"adam", "sgd"}));
    cmd_train->add_option("--preset", tr_preset, "Model preset")->capture_default_str()->check(CLI::IsMember(kPresets));
    cmd_train->add_option("--train-fraction", tr_fraction, "Train on this share of scenes (1 = all)")->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    cmd_train->add_option("--curve", tr_curve, "Write the per-step loss curve as JSON");
    cmd_train->add_option("--log-every", tr_log_every, "Progress interval in steps (0 = quiet)")->capture_default_str();
    cmd_train->add_option("--out", tr_out, "Output checkpoint (.lptm)")->required();

    // infer -------------------------------------------------------------------
    auto* cmd_infer = app.add_subcommand("infer", "Predict SH coefficients for a point cloud");
    std::string inf_model, inf_cloud, inf_out;
    std::size_t inf_points = 0;
    cmd_infer->add_option("--model", inf_model, "Checkpoint (.lptm)")->required()->check(CLI::ExistingFile);
    cmd_infer->add_option("--cloud", inf_cloud, "Input .lpc")->required()->check(CLI::ExistingFile);
    cmd_infer->add_option("--points", inf_points, "Downsample to N points first (0 keeps all)")->capture_default_str();
    cmd_infer->add_option("--out", inf_out, "Output SH JSON")->required();

    // eval --------------------------------------------------------------------
    auto* cmd_eval = app.add_subcommand("eval", "Score a model on a dataset");
    std::string ev_model, ev_data, ev_out;
    double ev_fraction = 1.0;
    int ev_w = kIrradianceEvalWidth, ev_h = kIrradianceEvalHeight;
    cmd_eval->add_option("--model", ev_model, "Checkpoint (.lptm)")->required()->check(CLI::ExistingFile);
    cmd_eval->add_option("--data", ev_data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    cmd_eval->add_option("--train-fraction", ev_fraction,
                         "Evaluate the test side of this scene split (1 = every tuple)")->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    cmd_eval->add_option("--width", ev_w, "Irradiance map width")->capture_default_str();
    cmd_eval->add_option("--height", ev_h, "Irradiance map height")->capture_default_str();
    cmd_eval->add_option("--out", ev_out, "Output report JSON")->required();

    // count-macs --------------------------------------------------------------
    auto* cmd_macs = app.add_subcommand("count-macs", "Parameter and MAC counts per point budget");
    std::vector<std::size_t> macs_points = {512, 768, 1024, 1280};
    std::string macs_preset = "standard", macs_out;
    cmd_macs->add_option("--points", macs_points, "Point budgets")->capture_default_str()->check(CLI::PositiveNumber);
    cmd_macs->add_option("--preset", macs_preset, "Model preset")->capture_default_str()->check(CLI::IsMember(kPresets));
    cmd_macs->add_option("--out", macs_out, "Output JSON (stdout table always printed)");

    // pipeline ----------------------------------------------------------------
    auto* cmd_pipe = app.add_subcommand("pipeline", "RGB-D observation to SH in one run");
    ImageInput pp_in;
    Intrinsics pp_k;
    FillOptions pp_fill;
    TransformOptions pp_tf;
    std::string pp_model, pp_out;
    pp_tf.points = 1280;
    pp_in.add_to(cmd_pipe);
    pp_k.add_to(cmd_pipe);
    pp_fill.add_to(cmd_pipe);
    pp_tf.add_to(cmd_pipe);
    cmd_pipe->add_option("--points", pp_tf.points, "Downsample to N points (0 keeps all)")->capture_default_str();
    cmd_pipe->add_option("--model", pp_model, "Checkpoint (.lptm)")->required()->check(CLI::ExistingFile);
    cmd_pipe->add_option("--out", pp_out, "Output SH JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        if (const auto flag = unknown_flag(app, argc, argv))
            std::cerr << "UsageError: unknown option " << *flag << '\n';
        else
            std::cerr << "UsageError: " << e.what() << '\n';
        return kUsage;
    }

    if (const char* env = std::getenv("LUMENPOINT_THREADS"); env && *env) {
        try {
            g.threads = std::stoi(env);
        } catch (const std::exception&) {
            std::cerr << "UsageError: LUMENPOINT_THREADS must be an integer, got '" << env << "'\n";
            return kUsage;
        }
        if (g.threads < 0) {
            std::cerr << "UsageError: LUMENPOINT_THREADS must be non-negative\n";
            return kUsage;
        }
    }
    set_thread_count(g.threads);

    try {
        if (cmd_unproject->parsed()) {
            const RgbdImage img = up_in.load();
            const PointCloud pc = stage_unproject(img, up_k.get(), up_fill);
            io::write_lpc(up_out, pc);
            report("wrote " + std::to_string(pc.size()) + " points to " + up_out);
        } else if (cmd_transform->parsed()) {
            // Depth maps are f32; read the flag at the same precision so a
            // printed depth reproduces the in-memory value exactly.
            const double depth = static_cast<float>(tf_depth);
            const PointCloud out =
                stage_transform(io::read_lpc(tf_cloud), tf.relation(), tf_k.get(), depth, tf.points, g.seed);
            io::write_lpc(tf_out, out);
            report("wrote " + std::to_string(out.size()) + " points to " + tf_out);
        } else if (cmd_project->parsed()) {
            const EquirectProjection p = project_equirect(io::read_lpc(pj_cloud), pj_w, pj_h);
            io::write_pfm(pj_out, p.map);
            const std::size_t total = p.map.pixels().size();
            report("covered " + std::to_string(total - p.map.missing_count()) + " of " + std::to_string(total) +
                   " pixels; skipped " + std::to_string(p.skipped_at_origin) + " points at the origin");
        } else if (cmd_shp->parsed()) {
            const EnvironmentMap env = io::read_pfm(shp_pano);
            ShCoefficients sh;
            json extra = json::object();
            if (shp_mc > 0) {
                sh = project_mc(sample_environment_uniform(env, shp_mc, g.seed));
                extra = {{"estimator", "monte-carlo"}, {"samples", shp_mc}, {"seed", g.seed}};
            } else if (shp_masked) {
                const MaskedProjection m = project_quadrature_masked(env);
                sh = m.coeffs;
                extra = {{"estimator", "quadrature-masked"}, {"covered_solid_angle", m.covered_solid_angle}};
            } else {
                sh = project_quadrature(env);
            }
            io::write_sh_json(shp_out, sh, extra);
        } else if (cmd_rec->parsed()) {
            io::write_pfm(rec_out, reconstruct_irradiance_map(irradiance_sh(io::read_sh_json(rec_sh)), rec_w, rec_h));
        } else if (cmd_probe->parsed()) {
            io::write_color_png(probe_out, probe_size, probe_size,
                                render_sphere(io::read_sh_json(probe_sh), probe_size, probe_exposure));
        } else if (cmd_gen->parsed()) {
            gen.seed = g.seed;
            // Keep the field of view when the image size changes.
            const GenerationConfig defaults;
            gen.generation.intrinsics.fx = defaults.intrinsics.fx * gen.generation.image_width / defaults.image_width;
            gen.generation.intrinsics.fy =
                defaults.intrinsics.fy * gen.generation.image_height / defaults.image_height;
            gen.generation.intrinsics.cx = (gen.generation.image_width - 1) / 2.0;
            gen.generation.intrinsics.cy = (gen.generation.image_height - 1) / 2.0;
            const Dataset ds = generate_dataset(gen);
            save_dataset(gen_out, ds);
            report("wrote " + std::to_string(ds.tuples.size()) + " tuples to " + gen_out);
        } else if (cmd_train->parsed()) {
            tr.seed = g.seed;
            tr.optimizer = learner::optimizer_from_string(tr_opt);
            learner::PointConvConfig cfg = preset(tr_preset);
            cfg.init_seed = g.seed;
            const auto tuples = select(load_dataset(tr_data).tuples, tr_fraction, g.seed, false);
            const auto samples = prepare_samples(tuples, cfg);
            learner::PointConvModel model(cfg);
            report("training on " + std::to_string(samples.size()) + " tuples, " +
                   std::to_string(model.parameter_count()) + " parameters");
            const auto result = learner::train(model, samples, tr, [&](std::size_t step, double loss) {
                if (tr_log_every > 0 && (step % tr_log_every == 0 || step + 1 == tr.steps))
                    report("step " + std::to_string(step) + " loss " + fmt("%.6g", loss));
            });
            const double final_loss = learner::evaluate_loss(model, samples);
            learner::save_checkpoint(tr_out, model,
                                     {{"steps", tr.steps},
                                      {"learning_rate", tr.learning_rate},
                                      {"final_lr_ratio", tr.final_lr_ratio},
                                      {"batch_size", tr.batch_size},
                                      {"optimizer", tr_opt},
                                      {"seed", g.seed},
                                      {"train_tuples", samples.size()},
                                      {"train_loss", final_loss}});
            if (!tr_curve.empty()) io::write_json(tr_curve, {{"loss", result.loss_curve}});
            report("final train sh_l2 " + fmt("%.6g", final_loss));
        } else if (cmd_infer->parsed()) {
            const learner::PointConvModel model = learner::load_checkpoint(inf_model);
            PointCloud pc = io::read_lpc(inf_cloud);
            if (inf_points > 0) {
                pc = downsample_uniform(pc, inf_points, g.seed);
                pc.quantize_to_f32();
            }
            io::write_sh_json(inf_out, model.predict(pc));
        } else if (cmd_eval->parsed()) {
            const learner::PointConvModel model = learner::load_checkpoint(ev_model);
            const auto tuples = select(load_dataset(ev_data).tuples, ev_fraction, g.seed, true);
            const EvalReport r = evaluate(
                [&](const DatasetTuple& t) { return model.predict(t.cloud); }, tuples);
            EvalReport scored = r;
            if (ev_w != kIrradianceEvalWidth || ev_h != kIrradianceEvalHeight) {
                // Re-score the irradiance term at the requested resolution.
                for (std::size_t i = 0; i < tuples.size(); ++i)
                    scored.irradiance_l2_per_tuple[i] =
                        irradiance_map_l2(model.predict(tuples[i].cloud), tuples[i].env, ev_w, ev_h);
                scored.irradiance_l2 = mean_stderr(scored.irradiance_l2_per_tuple);
                scored.irradiance_width = ev_w;
                scored.irradiance_height = ev_h;
            }
            io::write_json(ev_out, to_json(scored));
            std::cout << "tuples          " << tuples.size() << '\n'
                      << "sh_l2           " << format_mean_stderr(scored.sh_l2.mean, scored.sh_l2.stderr_) << '\n'
                      << "irradiance_l2   "
                      << format_mean_stderr(scored.irradiance_l2.mean, scored.irradiance_l2.stderr_) << '\n';
        } else if (cmd_macs->parsed()) {
            const learner::PointConvConfig cfg = preset(macs_preset);
            json rows = json::array();
            std::vector<ComplexityReport> reps;
            for (std::size_t n : macs_points) reps.push_back(count_complexity(cfg, n));
            const double ref = static_cast<double>(reps.back().macs);
            std::printf("%8s %14s %14s %10s\n", "points", "params(M)", "MACs(M)", "ratio");
            for (const ComplexityReport& r : reps) {
                std::printf("%8zu %14.3f %14.3f %10.3f\n", r.n_points, r.params / 1e6, r.macs / 1e6,
                            static_cast<double>(r.macs) / ref);
                rows.push_back(to_json(r));
            }
            if (!macs_out.empty()) io::write_json(macs_out, {{"preset", macs_preset}, {"rows", rows}});
        } else if (cmd_pipe->parsed()) {
            const learner::PointConvModel model = learner::load_checkpoint(pp_model);
            const RgbdImage img = pp_in.load();
            const CameraIntrinsics k = pp_k.get();
            const RenderingRelation rel = pp_tf.relation();
            const RgbdImage filled = pp_fill.no_fill ? img : fill_depth(img, pp_fill.cfg);
            const double depth = depth_at_render_pixel(filled, rel);
            FillOptions none;
            none.no_fill = true;
            const PointCloud cam = stage_unproject(filled, k, none);
            const PointCloud pc = stage_transform(cam, rel, k, depth, pp_tf.points, g.seed);
            io::write_sh_json(pp_out, model.predict(pc));
            report("depth at (" + fmt("%g", pp_tf.u) + ", " + fmt("%g", pp_tf.v) + ") = " + fmt("%.9g", depth) +
                   " m; " + std::to_string(pc.size()) + " points");
        }
    } catch (const Error& e) {
        std::cerr << to_string(e.code()) << ": " << e.what() << '\n';
        return kData;
    } catch (const CLI::Error& e) {
        std::cerr << "UsageError: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "InternalError: " << e.what() << '\n';
        return kInternal;
    }
    return kOk;
}
