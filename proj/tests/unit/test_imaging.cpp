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
#include "lumenpoint/error.hpp"
#include "lumenpoint/imaging.hpp"

#include <cmath>

using namespace lumenpoint;

namespace {

RgbdImage flat_image(int w, int h, float depth, Rgb color = {0.5f, 0.5f, 0.5f}) {
    RgbdImage img(w, h);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            img.color(u, v) = color;
            img.depth(u, v) = depth;
        }
    return img;
}

// Direct double loop over the cross-bilateral formula.
double bilateral_oracle(const RgbdImage& img, int u, int v, const DepthFillConfig& cfg) {
    double num = 0.0, den = 0.0;
    for (int dv = -cfg.window_radius; dv <= cfg.window_radius; ++dv)
        for (int du = -cfg.window_radius; du <= cfg.window_radius; ++du) {
            const int qu = u + du, qv = v + dv;
            if (qu < 0 || qv < 0 || qu >= img.width() || qv >= img.height()) continue;
            if (img.depth(qu, qv) <= 0.0f) continue;
            double c2 = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double d = double(img.color(u, v)[c]) - double(img.color(qu, qv)[c]);
                c2 += d * d;
            }
            const double w = std::exp(-(du * du + dv * dv) / (2.0 * cfg.spatial_sigma * cfg.spatial_sigma)) *
                             std::exp(-c2 / (2.0 * cfg.range_sigma * cfg.range_sigma));
            num += w * img.depth(qu, qv);
            den += w;
        }
    return num / den;
}

}  // namespace

TEST_SUITE("imaging") {

TEST_CASE("fill_depth leaves a complete image unchanged") {
    RgbdImage img = flat_image(16, 12, 1.5f);
    img.depth(3, 4) = 2.25f;
    img.color(7, 7) = {0.1f, 0.9f, 0.3f};
    CHECK(fill_depth(img, DepthFillConfig{}) == img);
}

TEST_CASE("3x3 hole surrounded by equal depths takes that depth") {
    RgbdImage img = flat_image(3, 3, 2.0f);
    img.depth(1, 1) = 0.0f;
    const RgbdImage out = fill_depth(img, DepthFillConfig{2.0, 0.1, 1});
    CHECK(out.depth(1, 1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("fill_depth matches a direct summation oracle across a color edge") {
    RgbdImage img(5, 5);
    for (int v = 0; v < 5; ++v)
        for (int u = 0; u < 5; ++u) {
            const bool left = u < 2;
            img.color(u, v) = left ? Rgb{0.2f, 0.2f, 0.2f} : Rgb{0.8f, 0.7f, 0.6f};
            img.depth(u, v) = left ? 1.0f + 0.05f * v : 3.0f + 0.1f * u;
        }
    img.depth(1, 2) = 0.0f;
    img.depth(2, 2) = 0.0f;
    const DepthFillConfig cfg{1.5, 0.2, 2};
    const RgbdImage out = fill_depth(img, cfg);
    CHECK(std::abs(out.depth(1, 2) - bilateral_oracle(img, 1, 2, cfg)) <= 1e-6);
    CHECK(std::abs(out.depth(2, 2) - bilateral_oracle(img, 2, 2, cfg)) <= 1e-6);
    // The guide keeps each hole on its own side of the edge.
    CHECK(out.depth(1, 2) < 1.5f);
    CHECK(out.depth(2, 2) > 2.5f);
    for (int v = 0; v < 5; ++v)
        for (int u = 0; u < 5; ++u)
            if (img.depth(u, v) > 0.0f) CHECK(out.depth(u, v) == img.depth(u, v));
}

TEST_CASE("fill_depth only uses originally valid pixels and leaves isolated holes") {
    RgbdImage img = flat_image(12, 12, 0.0f);
    img.depth(0, 0) = 1.0f;
    const RgbdImage out = fill_depth(img, DepthFillConfig{2.0, 0.1, 2});
    CHECK(out.depth(2, 2) == doctest::Approx(1.0));
    CHECK(out.depth(3, 3) == 0.0f);  // outside every window around a valid pixel
    CHECK(out.depth(11, 11) == 0.0f);
}

TEST_CASE("fill_depth is idempotent once every hole is filled") {
    RgbdImage img = flat_image(20, 16, 0.0f);
    Rng rng(3);
    for (int v = 0; v < 16; ++v)
        for (int u = 0; u < 20; ++u) {
            img.color(u, v) = {float(rng.uniform()), float(rng.uniform()), float(rng.uniform())};
            img.depth(u, v) = rng.uniform() < 0.1 ? 0.0f : float(rng.uniform(1.0, 4.0));
        }
    const RgbdImage once = fill_depth(img, DepthFillConfig{});
    REQUIRE(once.valid_depth_count() == once.pixel_count());
    CHECK(fill_depth(once, DepthFillConfig{}) == once);
}

TEST_CASE("fill_depth errors") {
    CHECK_THROWS_AS(fill_depth(flat_image(8, 8, 0.0f), DepthFillConfig{}), Error);
    try {
        fill_depth(flat_image(8, 8, 0.0f), DepthFillConfig{2.0, 0.1, 2});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AllDepthMissing);
    }
    CHECK_THROWS_AS(DepthFillConfig({0.0, 0.1, 2}).validate(8, 8), Error);
    CHECK_THROWS_AS(DepthFillConfig({2.0, -1.0, 2}).validate(8, 8), Error);
    CHECK_THROWS_AS(DepthFillConfig({2.0, 0.1, 5}).validate(8, 8), Error);
    CHECK_NOTHROW(DepthFillConfig({2.0, 0.1, 4}).validate(8, 8));
}

TEST_CASE("unproject the optical center") {
    RgbdImage img = flat_image(9, 7, 0.0f);
    img.depth(4, 3) = 3.0f;
    const PointCloud pc = unproject(img, CameraIntrinsics{100.0, 100.0, 4.0, 3.0});
    REQUIRE(pc.size() == 1);
    CHECK(pc[0].position == Vec3(0.0, 0.0, 3.0));
}

TEST_CASE("unproject follows the pinhole equations") {
    const CameraIntrinsics k{500.0, 500.0, 256.0, 256.0};
    RgbdImage img = flat_image(800, 512, 0.0f);
    img.depth(756, 256) = 2.0f;
    img.color(756, 256) = {0.25f, 0.5f, 0.75f};
    const PointCloud pc = unproject(img, k);
    REQUIRE(pc.size() == 1);
    CHECK(pc[0].position.x() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(pc[0].position.y() == 0.0);
    CHECK(pc[0].position.z() == 2.0);
    CHECK(pc[0].color == Rgb{0.25f, 0.5f, 0.75f});
}

TEST_CASE("a full 1280x1024 depth image yields 1310720 points") {
    const RgbdImage img = flat_image(1280, 1024, 1.25f);
    CHECK(unproject(img, CameraIntrinsics{1000.0, 1000.0, 640.0, 512.0}).size() == 1310720);
}

TEST_CASE("point count equals the number of positive depth pixels, in row-major order") {
    RgbdImage img = flat_image(31, 17, 0.0f);
    Rng rng(9);
    std::size_t expected = 0;
    for (int v = 0; v < 17; ++v)
        for (int u = 0; u < 31; ++u)
            if (rng.uniform() < 0.6) {
                img.depth(u, v) = float(rng.uniform(0.5, 5.0));
                ++expected;
            }
    const CameraIntrinsics k{40.0, 42.0, 15.0, 8.0};
    const PointCloud pc = unproject(img, k);
    CHECK(pc.size() == expected);
    CHECK(img.valid_depth_count() == expected);
    std::size_t i = 0;
    for (int v = 0; v < 17; ++v)
        for (int u = 0; u < 31; ++u)
            if (img.depth(u, v) > 0.0f) {
                const Eigen::Vector2d px = project_to_pixel(pc[i++].position, k);
                CHECK(px.x() == doctest::Approx(u));
                CHECK(px.y() == doctest::Approx(v));
            }
}

TEST_CASE("unprojection round trip and linearity in depth") {
    Rng rng(17);
    const CameraIntrinsics k{525.0, 525.0, 319.5, 239.5};
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform(0.0, 640.0), v = rng.uniform(0.0, 480.0);
        const double z = rng.uniform(1e-6, 10.0);
        const Vec3 p = unproject_pixel(u, v, z, k);
        const Eigen::Vector2d back = project_to_pixel(p, k);
        worst = std::max({worst, std::abs(back.x() - u), std::abs(back.y() - v)});
        const Vec3 q = unproject_pixel(u, v, 2.0 * z, k);
        CHECK_UNARY(q == 2.0 * p);
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("intrinsics and image validation") {
    CHECK_THROWS_AS(CameraIntrinsics({0.0, 1.0, 1.0, 1.0}).validate(4, 4), Error);
    CHECK_THROWS_AS(CameraIntrinsics({1.0, 1.0, 4.0, 1.0}).validate(4, 4), Error);
    CHECK_THROWS_AS(CameraIntrinsics({1.0, 1.0, 1.0, -0.5}).validate(4, 4), Error);
    CHECK_NOTHROW(CameraIntrinsics({1.0, 1.0, 0.0, 3.9}).validate(4, 4));
    RgbdImage img = flat_image(4, 4, 1.0f);
    img.depth(1, 1) = -1.0f;
    CHECK_THROWS_AS(img.validate(), Error);
    img.depth(1, 1) = std::nanf("");
    CHECK_THROWS_AS(img.validate(), Error);
    CHECK_THROWS_AS(RgbdImage(2, 2, std::vector<Rgb>(3), std::vector<float>(4)), Error);
}

}  // TEST_SUITE
