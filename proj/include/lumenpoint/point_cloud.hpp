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
#include "lumenpoint/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace lumenpoint {

struct Point {
    Vec3 position = Vec3::Zero();  // meters
    Rgb color{};                   // linear radiance

    bool operator==(const Point&) const = default;
};

// An unordered set of colored points. Positions are held in double precision
// and quantized to f32 only at file boundaries.
class PointCloud {
public:
    PointCloud() = default;
    explicit PointCloud(std::vector<Point> points) : points_(std::move(points)) {}

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }

    const Point& operator[](std::size_t i) const { return points_[i]; }
    Point& operator[](std::size_t i) { return points_[i]; }

    const std::vector<Point>& points() const noexcept { return points_; }
    std::vector<Point>& points() noexcept { return points_; }

    void push_back(const Point& p) { points_.push_back(p); }
    void reserve(std::size_t n) { points_.reserve(n); }

    // Throws InvalidArgument on non-finite coordinates or negative colors.
    void validate() const;

    // Rounds every position to the nearest f32, matching a save/load cycle.
    void quantize_to_f32();

    auto begin() const { return points_.begin(); }
    auto end() const { return points_.end(); }

    bool operator==(const PointCloud&) const = default;

private:
    std::vector<Point> points_;
};

// Relation between the observation image and the rendering position.
struct RenderingRelation {
    Eigen::Vector2d pixel_uv = Eigen::Vector2d::Zero();
    double scale_factor = 0.95;
    Mat3 rotation = Mat3::Identity();

    void validate() const;
};

// Throws NotARotation unless rot is orthonormal with det +1 (tolerance 1e-6).
void check_rotation(const Mat3& rot);

// Translates every point by -scale_factor * t, where t is the back-projection
// of rel.pixel_uv at depth_at_uv. The rendering position (scale_factor * t)
// lands on the origin; the surface target lands at (1 - scale_factor) * t.
PointCloud recenter(const PointCloud& pc, const RenderingRelation& rel,
                    const CameraIntrinsics& k, double depth_at_uv);

PointCloud rotate(const PointCloud& pc, const Mat3& rot);

// rotate(recenter(pc, ...), rel.rotation)
PointCloud view_transform(const PointCloud& pc, const RenderingRelation& rel,
                          const CameraIntrinsics& k, double depth_at_uv);

// Exactly min(n, |pc|) points drawn uniformly without replacement, in
// ascending source order. Deterministic for a fixed seed.
PointCloud downsample_uniform(const PointCloud& pc, std::size_t n, std::uint64_t seed);

struct EquirectProjection {
    EnvironmentMap map;
    std::size_t skipped_at_origin = 0;
};

// Bins point directions into a width x height panorama (width = 2 height).
// Each covered pixel receives the mean color of its points; uncovered pixels
// hold the missing sentinel. Points within 1e-9 m of the origin are skipped
// and counted.
EquirectProjection project_equirect(const PointCloud& pc, int width, int height);

}  // namespace lumenpoint
