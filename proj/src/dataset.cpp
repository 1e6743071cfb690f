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

#include "lumenpoint/dataset.hpp"

#include "lumenpoint/error.hpp"
#include "lumenpoint/io.hpp"
#include "lumenpoint/random.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>

namespace lumenpoint {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kTupleFiles[] = {"observation.rgbd", "e.pfm", "r.json", "p.lpc", "s.json"};

bool inside(const Vec3& p, const Vec3& lo, const Vec3& hi) {
    return (p.array() > lo.array()).all() && (p.array() < hi.array()).all();
}

// Wall hit by the ray p + s d leaving the box from the inside, and the ray
// parameter at the hit.
std::pair<int, double> exit_wall(const Vec3& p, const Vec3& d, const Vec3& lo, const Vec3& hi) {
    int wall = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (d[a] > 0.0) {
            const double s = (hi[a] - p[a]) / d[a];
            if (s < best) best = s, wall = 2 * a + 1;
        } else if (d[a] < 0.0) {
            const double s = (lo[a] - p[a]) / d[a];
            if (s < best) best = s, wall = 2 * a;
        }
    }
    return {wall, best};
}

Vec3 inward_normal(int wall) {
    Vec3 n = Vec3::Zero();
    n[wall / 2] = (wall % 2 == 0) ? 1.0 : -1.0;
    return n;
}

ShCoefficients round_to_f32(ShCoefficients sh) {
    for (auto& ch : sh.coeffs)
        for (double& x : ch) x = static_cast<double>(static_cast<float>(x));
    return sh;
}

json intrinsics_to_json(const CameraIntrinsics& k) {
    return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}};
}

CameraIntrinsics intrinsics_from_json(const json& j) {
    return {j.at("fx").get<double>(), j.at("fy").get<double>(), j.at("cx").get<double>(),
            j.at("cy").get<double>()};
}

json fill_to_json(const DepthFillConfig& f) {
    return {{"spatial_sigma", f.spatial_sigma}, {"range_sigma", f.range_sigma}, {"window_radius", f.window_radius}};
}

DepthFillConfig fill_from_json(const json& j) {
    return {j.at("spatial_sigma").get<double>(), j.at("range_sigma").get<double>(),
            j.at("window_radius").get<int>()};
}

json generation_to_json(const GenerationConfig& g) {
    return {{"image_width", g.image_width},
            {"image_height", g.image_height},
            {"intrinsics", intrinsics_to_json(g.intrinsics)},
            {"env_width", g.env_width},
            {"env_height", g.env_height},
            {"n_points", g.n_points},
            {"hole_fraction", g.hole_fraction},
            {"fill", fill_to_json(g.fill)},
            {"scale_factor", g.scale_factor}};
}

GenerationConfig generation_from_json(const json& j) {
    GenerationConfig g;
    g.image_width = j.at("image_width").get<int>();
    g.image_height = j.at("image_height").get<int>();
    g.intrinsics = intrinsics_from_json(j.at("intrinsics"));
    g.env_width = j.at("env_width").get<int>();
    g.env_height = j.at("env_height").get<int>();
    g.n_points = j.at("n_points").get<std::size_t>();
    g.hole_fraction = j.at("hole_fraction").get<double>();
    g.fill = fill_from_json(j.at("fill"));
    g.scale_factor = j.at("scale_factor").get<double>();
    return g;
}

void check_version(const json& j, const fs::path& where) {
    const int v = j.at("format_version").get<int>();
    if (v != kDatasetFormatVersion)
        fail(ErrorCode::FormatVersionMismatch, where.string() + ": format version " + std::to_string(v) +
                                                   ", expected " + std::to_string(kDatasetFormatVersion));
}

}  // namespace

void SceneSpec::validate() const {
    if (!(room_max.array() > room_min.array()).all())
        fail(ErrorCode::InvalidArgument, "room_max must exceed room_min on every axis");
    sky.validate();
    for (const Rgb& a : albedo)
        for (float c : a)
            if (!(c >= 0.0f && c <= 1.0f)) fail(ErrorCode::InvalidArgument, "albedo must lie in [0, 1]");
    if (!camera_position.allFinite() || !render_uv.allFinite())
        fail(ErrorCode::InvalidArgument, "camera position and render pixel must be finite");
    check_rotation(camera_rotation);
}

void GenerationConfig::validate() const {
    if (image_width < 1 || image_height < 1) fail(ErrorCode::InvalidArgument, "image size must be positive");
    intrinsics.validate(image_width, image_height);
    if (env_height < 1 || env_width != 2 * env_height)
        fail(ErrorCode::InvalidArgument, "panorama width must be twice its height");
    if (n_points < 1) fail(ErrorCode::InvalidArgument, "n_points must be positive");
    if (!(hole_fraction >= 0.0 && hole_fraction < 1.0))
        fail(ErrorCode::InvalidArgument, "hole_fraction must lie in [0, 1)");
    fill.validate(image_width, image_height);
    if (!(scale_factor > 0.0 && scale_factor < 1.0))
        fail(ErrorCode::InvalidArgument, "scale_factor must lie in (0, 1)");
}

SceneSpec random_scene(std::uint64_t seed, std::uint64_t scene_id, std::uint64_t view_index,
                       const GenerationConfig& cfg) {
    const std::uint64_t scene_seed = derive_seed(seed, scene_id);
    Rng room(derive_seed(scene_seed, 0));
    SceneSpec s;
    s.scene_id = scene_id;
    s.room_max = Vec3(room.uniform(3.0, 6.0), room.uniform(2.4, 3.2), room.uniform(3.0, 6.0));
    // Positive sky: the l >= 1 terms can never outweigh the constant term.
    for (int c = 0; c < kShChannels; ++c) {
        const double dc = room.uniform(2.0, 4.0);
        s.sky(c, 0) = dc;
        for (int i = 1; i < kShBasisCount; ++i) s.sky(c, i) = room.uniform(-0.06, 0.06) * dc;
    }
    for (Rgb& a : s.albedo)
        for (float& c : a) c = static_cast<float>(room.uniform(0.2, 0.9));

    Rng view(derive_seed(scene_seed, 1 + view_index));
    const Vec3 size = s.room_max - s.room_min;
    s.camera_position = Vec3(view.uniform(0.6, size.x() - 0.6), view.uniform(0.35, 0.65) * size.y(),
                             view.uniform(0.6, size.z() - 0.6));
    const double yaw = view.uniform(-std::numbers::pi, std::numbers::pi);
    const double pitch = view.uniform(-0.2, 0.2);
    s.camera_rotation = (Eigen::AngleAxisd(yaw, Vec3::UnitY()) * Eigen::AngleAxisd(pitch, Vec3::UnitX()))
                            .toRotationMatrix();
    const auto w = static_cast<std::uint64_t>(cfg.image_width), h = static_cast<std::uint64_t>(cfg.image_height);
    s.render_uv = Eigen::Vector2d(static_cast<double>(w / 4 + view.below(std::max<std::uint64_t>(w / 2, 1))),
                                  static_cast<double>(h / 4 + view.below(std::max<std::uint64_t>(h / 2, 1))));
    return s;
}

std::array<Rgb, kWallCount> wall_radiance(const SceneSpec& spec) {
    const ShCoefficients irr = irradiance_sh(spec.sky);
    std::array<Rgb, kWallCount> out{};
    for (int w = 0; w < kWallCount; ++w) {
        const auto e = sh_evaluate(irr, inward_normal(w));
        for (int c = 0; c < 3; ++c)
            out[w][c] = static_cast<float>(std::max(0.0, spec.albedo[w][c] * e[c] / std::numbers::pi));
    }
    return out;
}

double depth_at_render_pixel(const RgbdImage& filled, const RenderingRelation& rel) {
    const long u = std::lround(rel.pixel_uv.x()), v = std::lround(rel.pixel_uv.y());
    if (u < 0 || v < 0 || u >= filled.width() || v >= filled.height())
        fail(ErrorCode::DegenerateScene, "render pixel lies outside the image");
    return filled.depth(static_cast<int>(u), static_cast<int>(v));
}

DatasetTuple generate_synthetic(const SceneSpec& spec, const GenerationConfig& cfg, std::uint64_t seed) {
    spec.validate();
    cfg.validate();
    if (!inside(spec.camera_position, spec.room_min, spec.room_max))
        fail(ErrorCode::DegenerateScene, "camera is outside the room");
    const CameraIntrinsics& k = cfg.intrinsics;
    const auto walls = wall_radiance(spec);
    const Mat3& rot = spec.camera_rotation;

    const long ru = std::lround(spec.render_uv.x()), rv = std::lround(spec.render_uv.y());
    if (ru < 0 || rv < 0 || ru >= cfg.image_width || rv >= cfg.image_height)
        fail(ErrorCode::DegenerateScene, "render pixel misses the observed geometry");

    // Observation: analytic ray-box depth, flat Lambertian walls.
    RgbdImage obs(cfg.image_width, cfg.image_height);
    Rng holes(derive_seed(seed, 0));
    for (int v = 0; v < cfg.image_height; ++v) {
        for (int u = 0; u < cfg.image_width; ++u) {
            const Vec3 ray = rot * unproject_pixel(u, v, 1.0, k);
            const auto [wall, depth] = exit_wall(spec.camera_position, ray, spec.room_min, spec.room_max);
            obs.color(u, v) = walls[wall];
            const bool hole = holes.uniform() < cfg.hole_fraction && !(u == ru && v == rv);
            obs.depth(u, v) = hole ? 0.0f : static_cast<float>(depth);
        }
    }

    DatasetTuple t;
    t.observation = std::move(obs);
    t.intrinsics = k;
    t.fill = cfg.fill;
    t.scene_id = spec.scene_id;
    t.seed = seed;
    t.downsample_seed = derive_seed(seed, 1);
    t.relation.pixel_uv = Eigen::Vector2d(static_cast<double>(ru), static_cast<double>(rv));
    t.relation.scale_factor = cfg.scale_factor;
    t.relation.rotation = rot;

    const RgbdImage filled = fill_depth(t.observation, t.fill);
    const double d = depth_at_render_pixel(filled, t.relation);
    if (!(d > 0.0)) fail(ErrorCode::DegenerateScene, "render pixel has no depth");
    const Vec3 target = unproject_pixel(t.relation.pixel_uv.x(), t.relation.pixel_uv.y(), d, k);
    const Vec3 origin = spec.camera_position + rot * (cfg.scale_factor * target);
    if (!inside(origin, spec.room_min, spec.room_max))
        fail(ErrorCode::DegenerateScene, "rendering position falls outside the room");

    t.cloud = downsample_uniform(view_transform(unproject(filled, k), t.relation, k, d), cfg.n_points,
                                 t.downsample_seed);
    t.cloud.quantize_to_f32();

    // Panorama around the rendering position in world axes, which are the
    // axes of the rotated cloud.
    EnvironmentMap env(cfg.env_width, cfg.env_height);
    for (int v = 0; v < cfg.env_height; ++v)
        for (int u = 0; u < cfg.env_width; ++u) {
            const Vec3 dir = equirect_direction(u, v, cfg.env_width, cfg.env_height);
            env.at(u, v) = walls[exit_wall(origin, dir, spec.room_min, spec.room_max).first];
        }
    t.env = std::move(env);
    t.sh = round_to_f32(project_quadrature(t.env));
    return t;
}

PointCloud rebuild_cloud(const DatasetTuple& t, std::size_t n_points) {
    const RgbdImage filled = fill_depth(t.observation, t.fill);
    const double d = depth_at_render_pixel(filled, t.relation);
    PointCloud pc = downsample_uniform(view_transform(unproject(filled, t.intrinsics), t.relation, t.intrinsics, d),
                                       n_points, t.downsample_seed);
    pc.quantize_to_f32();
    return pc;
}

bool DatasetTuple::operator==(const DatasetTuple& o) const {
    return observation == o.observation && env == o.env && relation.pixel_uv == o.relation.pixel_uv &&
           relation.scale_factor == o.relation.scale_factor && relation.rotation == o.relation.rotation &&
           cloud == o.cloud && sh == o.sh && intrinsics.fx == o.intrinsics.fx && intrinsics.fy == o.intrinsics.fy &&
           intrinsics.cx == o.intrinsics.cx && intrinsics.cy == o.intrinsics.cy &&
           fill.spatial_sigma == o.fill.spatial_sigma && fill.range_sigma == o.fill.range_sigma &&
           fill.window_radius == o.fill.window_radius && scene_id == o.scene_id && seed == o.seed &&
           downsample_seed == o.downsample_seed;
}

Split split_by_scene(std::span<const std::uint64_t> scene_ids, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0))
        fail(ErrorCode::InvalidArgument, "train_fraction must lie in [0, 1]");
    std::vector<std::uint64_t> scenes(scene_ids.begin(), scene_ids.end());
    std::sort(scenes.begin(), scenes.end());
    scenes.erase(std::unique(scenes.begin(), scenes.end()), scenes.end());
    if (scenes.size() < 2) fail(ErrorCode::TooFewScenes, "a scene-level split needs at least two scenes");

    Rng rng(seed);
    for (std::size_t i = scenes.size() - 1; i > 0; --i) std::swap(scenes[i], scenes[rng.below(i + 1)]);
    const auto n = static_cast<long>(scenes.size());
    const long n_train = std::clamp(std::lround(train_fraction * static_cast<double>(n)), 1L, n - 1);
    std::vector<std::uint64_t> train_scenes(scenes.begin(), scenes.begin() + n_train);
    std::sort(train_scenes.begin(), train_scenes.end());

    Split out;
    for (std::size_t i = 0; i < scene_ids.size(); ++i) {
        const bool tr = std::binary_search(train_scenes.begin(), train_scenes.end(), scene_ids[i]);
        (tr ? out.train : out.test).push_back(i);
    }
    return out;
}

Split split(std::span<const DatasetTuple> tuples, double train_fraction, std::uint64_t seed) {
    std::vector<std::uint64_t> ids;
    ids.reserve(tuples.size());
    for (const DatasetTuple& t : tuples) ids.push_back(t.scene_id);
    return split_by_scene(ids, train_fraction, seed);
}

json relation_to_json(const RenderingRelation& rel) {
    return {{"pixel_uv", {rel.pixel_uv.x(), rel.pixel_uv.y()}},
            {"scale_factor", rel.scale_factor},
            {"rotation", io::mat3_to_json(rel.rotation)}};
}

RenderingRelation relation_from_json(const json& j) {
    try {
        RenderingRelation rel;
        const auto& uv = j.at("pixel_uv");
        rel.pixel_uv = Eigen::Vector2d(uv.at(0).get<double>(), uv.at(1).get<double>());
        rel.scale_factor = j.value("scale_factor", 0.95);
        rel.rotation = io::mat3_from_json(j.at("rotation"));
        rel.validate();
        return rel;
    } catch (const json::exception& e) {
        fail(ErrorCode::FormatError, std::string("malformed relation JSON: ") + e.what());
    }
}

std::string save_tuple(const fs::path& dir, const DatasetTuple& t) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    io::write_rgbd(dir / "observation.rgbd", t.observation);
    io::write_pfm(dir / "e.pfm", t.env);
    io::write_json(dir / "r.json", relation_to_json(t.relation));
    io::write_lpc(dir / "p.lpc", t.cloud);
    io::write_sh_json(dir / "s.json", t.sh);

    json files = json::object();
    for (const char* name : kTupleFiles) files[name] = io::sha256_file(dir / name);
    const json meta = {{"format_version", kDatasetFormatVersion},
                       {"scene_id", t.scene_id},
                       {"seed", t.seed},
                       {"downsample_seed", t.downsample_seed},
                       {"intrinsics", intrinsics_to_json(t.intrinsics)},
                       {"fill", fill_to_json(t.fill)},
                       {"files", files}};
    io::write_json(dir / "meta.json", meta);
    return io::sha256_file(dir / "meta.json");
}

DatasetTuple load_tuple(const fs::path& dir) {
    const json meta = io::read_json(dir / "meta.json");
    try {
        check_version(meta, dir / "meta.json");
        for (const char* name : kTupleFiles) {
            const auto expected = meta.at("files").at(name).get<std::string>();
            if (!fs::exists(dir / name)) fail(ErrorCode::IoError, "missing " + (dir / name).string());
            if (io::sha256_file(dir / name) != expected)
                fail(ErrorCode::ChecksumMismatch, (dir / name).string() + " does not match its recorded SHA-256");
        }
        DatasetTuple t;
        t.observation = io::read_rgbd(dir / "observation.rgbd");
        t.env = io::read_pfm(dir / "e.pfm");
        t.relation = relation_from_json(io::read_json(dir / "r.json"));
        t.cloud = io::read_lpc(dir / "p.lpc");
        t.sh = io::read_sh_json(dir / "s.json");
        t.intrinsics = intrinsics_from_json(meta.at("intrinsics"));
        t.fill = fill_from_json(meta.at("fill"));
        t.scene_id = meta.at("scene_id").get<std::uint64_t>();
        t.seed = meta.at("seed").get<std::uint64_t>();
        t.downsample_seed = meta.at("downsample_seed").get<std::uint64_t>();
        return t;
    } catch (const json::exception& e) {
        fail(ErrorCode::FormatError, (dir / "meta.json").string() + ": " + e.what());
    }
}

Dataset generate_dataset(const DatasetInfo& info) {
    info.generation.validate();
    const std::size_t total = info.scenes * info.tuples_per_scene;
    Dataset ds;
    ds.info = info;
    ds.tuples.resize(total);
    std::exception_ptr error;
    const auto n = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            const auto idx = static_cast<std::uint64_t>(i);
            const std::uint64_t scene = idx / info.tuples_per_scene, view = idx % info.tuples_per_scene;
            const SceneSpec spec = random_scene(info.seed, scene, view, info.generation);
            ds.tuples[idx] = generate_synthetic(spec, info.generation, derive_seed(derive_seed(info.seed, scene), 1000 + view));
        } catch (...) {
#pragma omp critical(lumenpoint_dataset_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return ds;
}

void save_dataset(const fs::path& root, const Dataset& ds) {
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create " + root.string() + ": " + ec.message());
    json entries = json::array();
    for (std::size_t i = 0; i < ds.tuples.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "t%05zu", i);
        const std::string meta_sha = save_tuple(root / name, ds.tuples[i]);
        entries.push_back({{"dir", name}, {"scene_id", ds.tuples[i].scene_id}, {"meta_sha256", meta_sha}});
    }
    const json manifest = {{"format_version", kDatasetFormatVersion},
                           {"generator",
                            {{"seed", ds.info.seed},
                             {"scenes", ds.info.scenes},
                             {"tuples_per_scene", ds.info.tuples_per_scene},
                             {"generation", generation_to_json(ds.info.generation)}}},
                           {"tuples", entries}};
    io::write_json(root / "manifest.json", manifest);
}

json read_manifest(const fs::path& root) {
    json m = io::read_json(root / "manifest.json");
    try {
        check_version(m, root / "manifest.json");
    } catch (const json::exception& e) {
        fail(ErrorCode::FormatError, (root / "manifest.json").string() + ": " + e.what());
    }
    return m;
}

Dataset load_dataset(const fs::path& root) {
    const json m = read_manifest(root);
    try {
        Dataset ds;
        const json& g = m.at("generator");
        ds.info.seed = g.at("seed").get<std::uint64_t>();
        ds.info.scenes = g.at("scenes").get<std::size_t>();
        ds.info.tuples_per_scene = g.at("tuples_per_scene").get<std::size_t>();
        ds.info.generation = generation_from_json(g.at("generation"));
        for (const json& e : m.at("tuples")) {
            const fs::path dir = root / e.at("dir").get<std::string>();
            if (io::sha256_file(dir / "meta.json") != e.at("meta_sha256").get<std::string>())
                fail(ErrorCode::ChecksumMismatch, (dir / "meta.json").string() + " does not match the manifest");
            ds.tuples.push_back(load_tuple(dir));
        }
        return ds;
    } catch (const json::exception& e) {
        fail(ErrorCode::FormatError, (root / "manifest.json").string() + ": " + e.what());
    }
}

}  // namespace lumenpoint
