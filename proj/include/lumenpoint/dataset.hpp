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

#pragma once

#include "lumenpoint/environment_map.hpp"
#include "lumenpoint/imaging.hpp"
#include "lumenpoint/point_cloud.hpp"
#include "lumenpoint/sph.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lumenpoint {

// Wall order used by SceneSpec::albedo: -x, +x, -y (ceiling), +y (floor), -z, +z.
// The world frame shares the camera convention: +y points down.
inline constexpr int kWallCount = 6;

// Synthetic stand-in for a captured room: an axis-aligned Lambertian box lit
// by a distant band-limited sky, observed by a pinhole camera inside it.
struct SceneSpec {
    std::uint64_t scene_id = 0;
    ShCoefficients sky;                   // radiance expansion of the distant light
    Vec3 room_min = Vec3::Zero();         // meters
    Vec3 room_max = Vec3(4.0, 3.0, 4.0);
    std::array<Rgb, kWallCount> albedo{};
    Vec3 camera_position = Vec3(2.0, 1.5, 2.0);
    Mat3 camera_rotation = Mat3::Identity();  // camera frame -> world frame
    Eigen::Vector2d render_uv = Eigen::Vector2d::Zero();

    // Throws InvalidArgument on malformed fields, NotARotation on a bad pose.
    void validate() const;
};

struct GenerationConfig {
    int image_width = 160;
    int image_height = 120;
    CameraIntrinsics intrinsics{144.0, 144.0, 79.5, 59.5};
    int env_width = 128;
    int env_height = 64;
    std::size_t n_points = 1280;
    double hole_fraction = 0.05;  // share of depth pixels knocked out before filling
    DepthFillConfig fill;
    double scale_factor = 0.95;

    void validate() const;
};

// Random room, sky and camera. Rooms, skies and albedos depend only on
// (seed, scene_id); the view also depends on view_index.
SceneSpec random_scene(std::uint64_t seed, std::uint64_t scene_id, std::uint64_t view_index,
                       const GenerationConfig& cfg);

// Outgoing radiance of each wall: albedo * E(inward normal) / pi.
std::array<Rgb, kWallCount> wall_radiance(const SceneSpec& spec);

// The five-item training tuple plus what is needed to replay its pipeline.
struct DatasetTuple {
    RgbdImage observation;       // raw capture, holes included
    EnvironmentMap env;          // panorama at the rendering position, world-aligned
    RenderingRelation relation;
    PointCloud cloud;            // transformed and downsampled, f32-exact
    ShCoefficients sh;           // project_quadrature(env)
    CameraIntrinsics intrinsics;
    DepthFillConfig fill;
    std::uint64_t scene_id = 0;
    std::uint64_t seed = 0;
    std::uint64_t downsample_seed = 0;

    bool operator==(const DatasetTuple& o) const;
};

// Renders the scene, runs fill -> unproject -> recenter -> rotate ->
// downsample and projects the panorama. Throws DegenerateScene when the
// camera is outside the room or the render pixel misses it.
DatasetTuple generate_synthetic(const SceneSpec& spec, const GenerationConfig& cfg, std::uint64_t seed);

// Replays fill -> unproject -> view transform -> downsample from the stored
// observation and relation.
PointCloud rebuild_cloud(const DatasetTuple& t, std::size_t n_points);

// Depth of the filled observation at the relation's pixel.
double depth_at_render_pixel(const RgbdImage& filled, const RenderingRelation& rel);

struct Split {
    std::vector<std::size_t> train;  // indices into the input, ascending
    std::vector<std::size_t> test;
};

// Scene-level partition. round(fraction * scenes) scenes (clamped to
// [1, scenes - 1]) go to train. Throws TooFewScenes with fewer than two scenes.
Split split_by_scene(std::span<const std::uint64_t> scene_ids, double train_fraction, std::uint64_t seed);
Split split(std::span<const DatasetTuple> tuples, double train_fraction, std::uint64_t seed);

// --- storage ------------------------------------------------------------------
//
// A tuple directory holds observation.rgbd, e.pfm, r.json, p.lpc, s.json and
// meta.json. meta.json records the format version, seeds, intrinsics and the
// SHA-256 of every other file. A dataset root adds manifest.json listing the
// tuple directories in order with the checksum of each meta.json.

inline constexpr int kDatasetFormatVersion = 1;

nlohmann::json relation_to_json(const RenderingRelation& rel);
RenderingRelation relation_from_json(const nlohmann::json& j);

// Returns the SHA-256 of the written meta.json.
std::string save_tuple(const std::filesystem::path& dir, const DatasetTuple& t);
// Throws ChecksumMismatch, FormatVersionMismatch, IoError or FormatError.
DatasetTuple load_tuple(const std::filesystem::path& dir);

struct DatasetInfo {
    std::uint64_t seed = 0;
    std::size_t scenes = 0;
    std::size_t tuples_per_scene = 0;
    GenerationConfig generation;
};

struct Dataset {
    DatasetInfo info;
    std::vector<DatasetTuple> tuples;
};

// Generates scenes * tuples_per_scene tuples, ordered by (scene, view).
// Tuples are independent and produced in parallel.
Dataset generate_dataset(const DatasetInfo& info);

void save_dataset(const std::filesystem::path& root, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& root);
nlohmann::json read_manifest(const std::filesystem::path& root);

}  // namespace lumenpoint
