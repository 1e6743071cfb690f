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
#include "lumenpoint/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace lumenpoint {

// Registered color + depth pair (C, D). Color is linear radiance; depth is
// meters along +z with 0 marking a missing sample.
class RgbdImage {
public:
    RgbdImage() = default;
    RgbdImage(int width, int height);
    RgbdImage(int width, int height, std::vector<Rgb> color, std::vector<float> depth);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return depth_.size(); }

    const Rgb& color(int u, int v) const { return color_[index(u, v)]; }
    Rgb& color(int u, int v) { return color_[index(u, v)]; }
    float depth(int u, int v) const { return depth_[index(u, v)]; }
    float& depth(int u, int v) { return depth_[index(u, v)]; }

    std::span<const Rgb> color() const noexcept { return color_; }
    std::span<const float> depth() const noexcept { return depth_; }
    std::span<Rgb> color() noexcept { return color_; }
    std::span<float> depth() noexcept { return depth_; }

    std::size_t valid_depth_count() const;

    // Throws InvalidArgument on mismatched sizes or negative/non-finite depth.
    void validate() const;

    bool operator==(const RgbdImage&) const = default;

private:
    std::size_t index(int u, int v) const {
        return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(u);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> color_;
    std::vector<float> depth_;
};

struct DepthFillConfig {
    double spatial_sigma = 2.0;  // pixels
    double range_sigma = 0.1;    // linear RGB distance
    int window_radius = 5;       // pixels

    void validate(int width, int height) const;
};

// Single-pass cross-bilateral hole filling guided by the color image. Each
// missing pixel with at least one valid pixel inside its square window gets
//   sum_q w_q D_q / sum_q w_q,
//   w_q = exp(-|p - q|^2 / 2 s^2) exp(-|C_p - C_q|^2 / 2 r^2),
// over originally valid q. Valid pixels are copied through.
// Throws AllDepthMissing if the image has no valid depth.
RgbdImage fill_depth(const RgbdImage& img, const DepthFillConfig& cfg);

// One point per pixel with z > 0, in row-major pixel order.
PointCloud unproject(const RgbdImage& img, const CameraIntrinsics& k);

}  // namespace lumenpoint
