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

#include <doctest.h>

#include "helpers.hpp"
#include "lumenpoint/dataset.hpp"
#include "lumenpoint/error.hpp"
#include "lumenpoint/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

using namespace lumenpoint;
namespace fs = std::filesystem;

namespace {

GenerationConfig small_config() {
    GenerationConfig cfg;
    cfg.image_width = 64;
    cfg.image_height = 48;
    cfg.intrinsics = {58.0, 58.0, 31.5, 23.5};
    cfg.env_width = 64;
    cfg.env_height = 32;
    cfg.n_points = 256;
    return cfg;
}

SceneSpec flat_scene() {
    SceneSpec s;
    s.scene_id = 4;
    for (int c = 0; c < 3; ++c) s.sky(c, 0) = 3.0;
    s.albedo.fill({0.5f, 0.5f, 0.5f});
    s.room_min = Vec3(0, 0, 0);
    s.room_max = Vec3(4, 3, 5);
    s.camera_position = Vec3(2, 1.5, 1);
    s.render_uv = {32, 24};
    return s;
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

bool same_files(const fs::path& a, const fs::path& b) {
    for (const char* name : {"observation.rgbd", "e.pfm", "r.json", "p.lpc", "s.json", "meta.json"})
        if (io::read_bytes(a / name) != io::read_bytes(b / name)) return false;
    return true;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("flat lighting gives a uniform observation and a DC-only target") {
    const GenerationConfig cfg = small_config();
    const DatasetTuple t = generate_synthetic(flat_scene(), cfg, 1);
    const Rgb first = t.observation.color()[0];
    for (const Rgb& c : t.observation.color())
        for (int ch = 0; ch < 3; ++ch) CHECK(std::abs(c[ch] - first[ch]) <= 1e-5);
    // Lambertian wall under a constant sky: albedo * L.
    const double L = 3.0 / std::sqrt(4.0 * std::numbers::pi);
    CHECK(first[0] == doctest::Approx(0.5 * L).epsilon(1e-5));
    for (int c = 0; c < 3; ++c)
        for (int i = 1; i < 9; ++i) CHECK(std::abs(t.sh(c, i)) <= 1e-12);
}

TEST_CASE("tuples satisfy the stored invariants") {
    const GenerationConfig cfg = small_config();
    for (std::uint64_t seed : {3u, 8u, 21u}) {
        const DatasetTuple t = generate_synthetic(random_scene(seed, 0, 0, cfg), cfg, seed);
        CHECK(t.cloud.size() == cfg.n_points);
        const ShCoefficients p = project_quadrature(t.env);
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 9; ++i) CHECK(std::abs(p(c, i) - t.sh(c, i)) <= 1e-3);
        CHECK(rebuild_cloud(t, cfg.n_points) == t.cloud);
        CHECK(t.env.complete());
        CHECK(depth_at_render_pixel(fill_depth(t.observation, t.fill), t.relation) > 0.0);
    }
}

TEST_CASE("1280 points at the default size") {
    const GenerationConfig cfg;
    const DatasetTuple t = generate_synthetic(random_scene(5, 1, 0, cfg), cfg, 5);
    CHECK(t.cloud.size() == 1280);
}

TEST_CASE("same seed writes byte-identical files") {
    const GenerationConfig cfg = small_config();
    const fs::path dir = lptest::scratch_dir("ds_det");
    const SceneSpec s = random_scene(9, 2, 1, cfg);
    save_tuple(dir / "a", generate_synthetic(s, cfg, 77));
    save_tuple(dir / "b", generate_synthetic(s, cfg, 77));
    CHECK(same_files(dir / "a", dir / "b"));
    save_tuple(dir / "c", generate_synthetic(s, cfg, 78));
    CHECK(io::read_bytes(dir / "a" / "p.lpc") != io::read_bytes(dir / "c" / "p.lpc"));
}

TEST_CASE("degenerate scenes are rejected") {
    const GenerationConfig cfg = small_config();
    SceneSpec outside = flat_scene();
    outside.camera_position = Vec3(-1, 1.5, 1);
    CHECK(code_of([&] { generate_synthetic(outside, cfg, 1); }) == ErrorCode::DegenerateScene);
    SceneSpec off_image = flat_scene();
    off_image.render_uv = {500, 10};
    CHECK(code_of([&] { generate_synthetic(off_image, cfg, 1); }) == ErrorCode::DegenerateScene);
    SceneSpec bad_pose = flat_scene();
    bad_pose.camera_rotation(0, 0) = 2.0;
    CHECK(code_of([&] { generate_synthetic(bad_pose, cfg, 1); }) == ErrorCode::NotARotation);
}

TEST_CASE("random scenes keep the camera inside the room") {
    const GenerationConfig cfg = small_config();
    for (std::uint64_t id = 0; id < 50; ++id) {
        const SceneSpec s = random_scene(1, id, id % 3, cfg);
        CHECK((s.camera_position.array() > s.room_min.array()).all());
        CHECK((s.camera_position.array() < s.room_max.array()).all());
        CHECK_NOTHROW(s.validate());
    }
    // Room and sky depend on the scene only.
    const SceneSpec a = random_scene(1, 7, 0, cfg), b = random_scene(1, 7, 3, cfg);
    CHECK(a.room_max == b.room_max);
    CHECK(a.sky == b.sky);
}

TEST_CASE("split of ten scenes at 0.8") {
    std::vector<std::uint64_t> ids;
    for (std::uint64_t s = 0; s < 10; ++s)
        for (int v = 0; v < 3; ++v) ids.push_back(s);
    const Split sp = split_by_scene(ids, 0.8, 4);
    std::set<std::uint64_t> train_scenes, test_scenes;
    for (std::size_t i : sp.train) train_scenes.insert(ids[i]);
    for (std::size_t i : sp.test) test_scenes.insert(ids[i]);
    CHECK(train_scenes.size() == 8);
    CHECK(test_scenes.size() == 2);
    CHECK(sp.train.size() + sp.test.size() == ids.size());
    CHECK(std::is_sorted(sp.train.begin(), sp.train.end()));
    CHECK(std::is_sorted(sp.test.begin(), sp.test.end()));
}

TEST_CASE("split is a deterministic scene-level partition") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::uint64_t> ids(40);
        for (auto& id : ids) id = rng.below(7) + 100;
        if (std::set<std::uint64_t>(ids.begin(), ids.end()).size() < 2) continue;
        const double fraction = rng.uniform(0.0, 1.0);
        const Split a = split_by_scene(ids, fraction, std::uint64_t(trial));
        const Split b = split_by_scene(ids, fraction, std::uint64_t(trial));
        CHECK(a.train == b.train);
        CHECK(a.test == b.test);
        std::set<std::uint64_t> tr, te;
        std::vector<int> seen(ids.size(), 0);
        for (std::size_t i : a.train) tr.insert(ids[i]), ++seen[i];
        for (std::size_t i : a.test) te.insert(ids[i]), ++seen[i];
        for (std::uint64_t s : tr) CHECK(te.count(s) == 0);
        CHECK(std::all_of(seen.begin(), seen.end(), [](int x) { return x == 1; }));
        CHECK(!tr.empty());
        CHECK(!te.empty());
    }
}

TEST_CASE("split needs two scenes") {
    const std::vector<std::uint64_t> one(5, 3);
    CHECK(code_of([&] { split_by_scene(one, 0.5, 1); }) == ErrorCode::TooFewScenes);
    CHECK(code_of([&] { split_by_scene({}, 0.5, 1); }) == ErrorCode::TooFewScenes);
}

TEST_CASE("save and load round trip") {
    const GenerationConfig cfg = small_config();
    const DatasetTuple t = generate_synthetic(random_scene(2, 3, 0, cfg), cfg, 12);
    const fs::path dir = lptest::scratch_dir("ds_rt");
    const std::string meta = save_tuple(dir, t);
    CHECK(meta == io::sha256_file(dir / "meta.json"));
    const DatasetTuple back = load_tuple(dir);
    CHECK(back == t);
    CHECK(back.cloud == t.cloud);
    CHECK(back.sh == t.sh);
    CHECK(back.env == t.env);
    CHECK(back.observation == t.observation);
}

TEST_CASE("truncated or edited files fail the checksum") {
    const GenerationConfig cfg = small_config();
    const DatasetTuple t = generate_synthetic(random_scene(2, 3, 0, cfg), cfg, 12);
    const fs::path dir = lptest::scratch_dir("ds_trunc");
    save_tuple(dir, t);
    auto bytes = io::read_bytes(dir / "p.lpc");
    bytes.resize(bytes.size() / 2);
    io::write_bytes(dir / "p.lpc", bytes);
    CHECK(code_of([&] { load_tuple(dir); }) == ErrorCode::ChecksumMismatch);

    save_tuple(dir, t);
    nlohmann::json meta = io::read_json(dir / "meta.json");
    meta["format_version"] = kDatasetFormatVersion + 1;
    io::write_json(dir / "meta.json", meta);
    CHECK(code_of([&] { load_tuple(dir); }) == ErrorCode::FormatVersionMismatch);

    fs::remove(dir / "meta.json");
    CHECK(code_of([&] { load_tuple(dir); }) == ErrorCode::IoError);
}

TEST_CASE("relation JSON round trip") {
    RenderingRelation r;
    r.pixel_uv = {12.5, 40.0};
    r.scale_factor = 0.9;
    r.rotation = lptest::rot_about(Vec3(0, 1, 0), 0.3);
    const RenderingRelation back = relation_from_json(relation_to_json(r));
    CHECK(back.pixel_uv == r.pixel_uv);
    CHECK(back.scale_factor == r.scale_factor);
    CHECK(back.rotation == r.rotation);
}

TEST_CASE("dataset of 100 tuples keeps a stable manifest") {
    DatasetInfo info;
    info.seed = 3;
    info.scenes = 50;
    info.tuples_per_scene = 2;
    info.generation = small_config();
    info.generation.image_width = 32;
    info.generation.image_height = 24;
    info.generation.intrinsics = {29.0, 29.0, 15.5, 11.5};
    info.generation.env_width = 16;
    info.generation.env_height = 8;
    info.generation.n_points = 32;
    const Dataset ds = generate_dataset(info);
    REQUIRE(ds.tuples.size() == 100);
    for (std::size_t i = 0; i < ds.tuples.size(); ++i) CHECK(ds.tuples[i].scene_id == i / 2);

    const fs::path root = lptest::scratch_dir("ds_manifest");
    save_dataset(root, ds);
    const nlohmann::json m = read_manifest(root);
    REQUIRE(m["tuples"].size() == 100);
    for (std::size_t i = 0; i < 100; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "t%05zu", i);
        CHECK(m["tuples"][i]["dir"] == name);
        CHECK(m["tuples"][i]["scene_id"] == i / 2);
        CHECK(m["tuples"][i]["meta_sha256"] == io::sha256_file(root / name / "meta.json"));
    }
    CHECK(m["format_version"] == kDatasetFormatVersion);
    CHECK(m["generator"]["seed"] == 3);

    const Dataset back = load_dataset(root);
    CHECK(back.info.scenes == 50);
    CHECK(back.info.tuples_per_scene == 2);
    CHECK(back.tuples == ds.tuples);

    // Generation is independent of the worker count.
    const fs::path again = lptest::scratch_dir("ds_manifest2");
    save_dataset(again, generate_dataset(info));
    CHECK(io::read_bytes(root / "manifest.json") == io::read_bytes(again / "manifest.json"));
}

}  // TEST_SUITE
