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

#include "lumenpoint/types.hpp"

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

namespace lumenpoint {

// Per-channel value marking a pixel with no observation.
inline constexpr float kMissing = -1.0f;

// Equirectangular convention shared by every panorama in the project.
// Longitude theta in [-pi, pi) is measured from +z towards +x around the
// vertical axis; latitude phi in [-pi/2, pi/2] is positive towards -y (up in
// the camera frame). Pixel (0, 0) is the top-left cell starting at
// (theta, phi) = (-pi, +pi/2). A direction is
//   (cos(phi) sin(theta), -sin(phi), cos(phi) cos(theta)).
Vec3 direction_from_angles(double theta, double phi);

// Unit direction through the center of pixel (u, v).
Vec3 equirect_direction(int u, int v, int width, int height);

// Pixel containing a (not necessarily unit) direction. Longitude wraps and
// latitude clamps.
std::pair<int, int> equirect_pixel(const Vec3& dir, int width, int height);

// Exact solid angle of one pixel in row v: (2 pi / width) (sin(top) - sin(bottom)).
double equirect_pixel_solid_angle(int v, int width, int height);

// Radiance panorama E, width = 2 height, row-major from the top row.
class EnvironmentMap {
public:
    EnvironmentMap() = default;
    EnvironmentMap(int width, int height, Rgb fill = {0.0f, 0.0f, 0.0f});
    EnvironmentMap(int width, int height, std::vector<Rgb> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    const Rgb& at(int u, int v) const { return pixels_[index(u, v)]; }
    Rgb& at(int u, int v) { return pixels_[index(u, v)]; }

    const std::vector<Rgb>& pixels() const noexcept { return pixels_; }
    std::vector<Rgb>& pixels() noexcept { return pixels_; }

    bool is_missing(int u, int v) const;
    std::size_t missing_count() const;
    bool complete() const { return missing_count() == 0; }

    // Throws InvalidArgument if width != 2 height or a non-missing pixel is
    // negative or non-finite.
    void validate() const;

    bool operator==(const EnvironmentMap&) const = default;

private:
    std::size_t index(int u, int v) const {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(u);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

inline bool is_missing(const Rgb& c) {
    return c[0] == kMissing && c[1] == kMissing && c[2] == kMissing;
}

// Cosine-weighted irradiance panorama, kept in double precision.
struct IrradianceMap {
    int width = 0;
    int height = 0;
    std::vector<std::array<double, 3>> pixels;

    IrradianceMap() = default;
    IrradianceMap(int w, int h)
        : width(w), height(h),
          pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h),
                 std::array<double, 3>{0.0, 0.0, 0.0}) {}

    const std::array<double, 3>& at(int u, int v) const {
        return pixels[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(u)];
    }
    std::array<double, 3>& at(int u, int v) {
        return pixels[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(u)];
    }

    bool operator==(const IrradianceMap&) const = default;
};

}  // namespace lumenpoint
