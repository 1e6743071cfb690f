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

#include "lumenpoint/environment_map.hpp"

#include "lumenpoint/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace lumenpoint {

using std::numbers::pi;

Vec3 direction_from_angles(double theta, double phi) {
    const double c = std::cos(phi);
    return {c * std::sin(theta), -std::sin(phi), c * std::cos(theta)};
}

Vec3 equirect_direction(int u, int v, int width, int height) {
    const double theta = -pi + (u + 0.5) * (2.0 * pi / width);
    const double phi = 0.5 * pi - (v + 0.5) * (pi / height);
    return direction_from_angles(theta, phi);
}

std::pair<int, int> equirect_pixel(const Vec3& dir, int width, int height) {
    const double theta = std::atan2(dir.x(), dir.z());
    const double phi = std::atan2(-dir.y(), std::hypot(dir.x(), dir.z()));
    int u = static_cast<int>(std::floor((theta + pi) / (2.0 * pi) * width));
    int v = static_cast<int>(std::floor((0.5 * pi - phi) / pi * height));
    if (u >= width) u -= width;
    u = std::clamp(u, 0, width - 1);
    v = std::clamp(v, 0, height - 1);
    return {u, v};
}

double equirect_pixel_solid_angle(int v, int width, int height) {
    const double top = 0.5 * pi - v * (pi / height);
    const double bottom = 0.5 * pi - (v + 1) * (pi / height);
    return (2.0 * pi / width) * (std::sin(top) - std::sin(bottom));
}

EnvironmentMap::EnvironmentMap(int width, int height, Rgb fill)
    : width_(width), height_(height) {
    if (width <= 0 || height <= 0 || width != 2 * height)
        fail(ErrorCode::InvalidArgument,
             "environment map must satisfy width = 2 * height > 0, got " +
                 std::to_string(width) + "x" + std::to_string(height));
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

EnvironmentMap::EnvironmentMap(int width, int height, std::vector<Rgb> pixels)
    : EnvironmentMap(width, height) {
    if (pixels.size() != pixels_.size())
        fail(ErrorCode::InvalidArgument, "environment map pixel count does not match dimensions");
    pixels_ = std::move(pixels);
}

bool EnvironmentMap::is_missing(int u, int v) const { return lumenpoint::is_missing(at(u, v)); }

std::size_t EnvironmentMap::missing_count() const {
    return static_cast<std::size_t>(
        std::count_if(pixels_.begin(), pixels_.end(), [](const Rgb& c) { return lumenpoint::is_missing(c); }));
}

void EnvironmentMap::validate() const {
    if (width_ <= 0 || width_ != 2 * height_)
        fail(ErrorCode::InvalidArgument, "environment map must satisfy width = 2 * height");
    for (const Rgb& c : pixels_) {
        if (lumenpoint::is_missing(c)) continue;
        for (float x : c) {
            if (!std::isfinite(x) || x < 0.0f)
                fail(ErrorCode::InvalidArgument, "environment map holds negative or non-finite radiance");
        }
    }
}

}  // namespace lumenpoint
