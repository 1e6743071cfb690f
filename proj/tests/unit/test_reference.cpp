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
#include "lumenpoint/imaging.hpp"
#include "lumenpoint/learner/train.hpp"
#include "lumenpoint/parallel.hpp"
#include "lumenpoint/reference.hpp"

using namespace lumenpoint;

namespace {

RgbdImage random_image(int w, int h, std::uint64_t seed, double holes) {
    RgbdImage img(w, h);
    Rng rng(seed);
    for (int v = 0; v < h; ++v)
        for (int u = 0; u < w; ++u) {
            img.color(u, v) = {float(rng.uniform()), float(rng.uniform()), float(rng.uniform())};
            img.depth(u, v) = rng.uniform() < holes ? 0.0f : float(rng.uniform(0.5, 5.0));
        }
    return img;
}

EnvironmentMap random_env(int w, int h, std::uint64_t seed) {
    EnvironmentMap env(w, h);
    Rng rng(seed);
    for (Rgb& p : env.pixels()) p = {float(rng.uniform(0, 4)), float(rng.uniform(0, 4)), float(rng.uniform(0, 4))};
    return env;
}

struct ThreadGuard {
    ~ThreadGuard() { set_thread_count(0); }
};

}  // namespace

TEST_SUITE("reference") {

TEST_CASE("parallel kernels match the serial references bit for bit") {
    ThreadGuard guard;
    const RgbdImage img = random_image(97, 61, 1, 0.2);
    const CameraIntrinsics k{90.0, 91.0, 48.0, 30.0};
    const DepthFillConfig fill;
    const PointCloud pc = lptest::random_cloud(5000, 2);
    const EnvironmentMap env = random_env(64, 32, 3);
    const auto samples = sample_environment_uniform(env, 3001, 4);
    const ShCoefficients irr = irradiance_sh(lptest::random_sh(5));

    const RgbdImage ref_fill = reference::fill_depth(img, fill);
    const PointCloud ref_cloud = reference::unproject(ref_fill, k);
    const EquirectProjection ref_proj = reference::project_equirect(pc, 64, 32);
    const ShCoefficients ref_q = reference::project_quadrature(env);
    const ShCoefficients ref_mc = reference::project_mc(samples);
    const IrradianceMap ref_rec = reference::reconstruct_irradiance_map(irr, 48, 24);
    const IrradianceMap ref_oracle = reference::diffuse_convolution_oracle(env, 16, 8);

    for (int threads : {1, 2, 4}) {
        CAPTURE(threads);
        set_thread_count(threads);
        CHECK(fill_depth(img, fill) == ref_fill);
        CHECK(unproject(ref_fill, k) == ref_cloud);
        const EquirectProjection proj = project_equirect(pc, 64, 32);
        CHECK(proj.map == ref_proj.map);
        CHECK(proj.skipped_at_origin == ref_proj.skipped_at_origin);
        CHECK(project_quadrature(env) == ref_q);
        CHECK(project_mc(samples) == ref_mc);
        CHECK(reconstruct_irradiance_map(irr, 48, 24) == ref_rec);
        CHECK(diffuse_convolution_oracle(env, 16, 8) == ref_oracle);
    }
}

TEST_CASE("training steps are bitwise identical across thread counts") {
    using namespace lumenpoint::learner;
    ThreadGuard guard;
    const PointConvConfig cfg = PointConvConfig::standard();
    std::vector<TrainingSample> samples;
    for (std::uint64_t s = 0; s < 4; ++s)
        samples.push_back({prepare_cloud(lptest::random_cloud(512, 40 + s), cfg), lptest::random_sh(50 + s)});
    TrainConfig tc;
    tc.steps = 3;
    tc.batch_size = 4;
    std::vector<std::vector<double>> runs;
    for (int threads : {1, 2, 4, 4}) {
        set_thread_count(threads);
        PointConvModel model(cfg);
        train(model, samples, tc);
        std::vector<double> flat;
        for (const Parameter& p : model.parameters()) flat.insert(flat.end(), p.value.values().begin(), p.value.values().end());
        runs.push_back(std::move(flat));
    }
    for (std::size_t i = 1; i < runs.size(); ++i) CHECK(runs[i] == runs[0]);
}

TEST_CASE("pairwise sum is exact on small integers and order-fixed") {
    std::vector<double> v(1001);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(i);
    CHECK(pairwise_sum(v) == 500500.0);
    CHECK(pairwise_sum({}) == 0.0);
    std::vector<double> strided = {1, 10, 2, 20, 3, 30};
    std::vector<double> out(2);
    pairwise_sum_strided(strided, 2, out);
    CHECK(out[0] == 6.0);
    CHECK(out[1] == 60.0);
}

}  // TEST_SUITE
