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

#include "lumenpoint/point_cloud.hpp"
#include "lumenpoint/random.hpp"
#include "lumenpoint/sph.hpp"

#include <Eigen/Geometry>

#include <filesystem>
#include <string>

namespace lptest {

using namespace lumenpoint;

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("lumenpoint_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline PointCloud random_cloud(std::size_t n, std::uint64_t seed, double extent = 2.0) {
    Rng rng(seed);
    PointCloud pc;
    pc.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Point p;
        p.position = Vec3(rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-extent, extent));
        p.color = {float(rng.uniform()), float(rng.uniform()), float(rng.uniform())};
        pc.push_back(p);
    }
    return pc;
}

inline ShCoefficients random_sh(std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    ShCoefficients sh;
    for (auto& ch : sh.coeffs)
        for (double& x : ch) x = rng.uniform(lo, hi);
    return sh;
}

inline Mat3 rot_about(const Vec3& axis, double angle) {
    return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

}  // namespace lptest
