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

#include <Eigen/Core>

#include <array>

namespace lumenpoint {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Linear RGB radiance.
using Rgb = std::array<float, 3>;

// Pinhole intrinsics in pixels. Camera frame: +z along the optical axis,
// +x right, +y down.
struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;

    // Throws InvalidArgument unless fx, fy > 0 and the principal point lies
    // inside a width x height image.
    void validate(int width, int height) const;
};

// Back-projects pixel (u, v) at depth z: x = (u - cx) z / fx, y = (v - cy) z / fy.
inline Vec3 unproject_pixel(double u, double v, double z, const CameraIntrinsics& k) {
    return {(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z};
}

// Inverse of unproject_pixel for z > 0.
inline Eigen::Vector2d project_to_pixel(const Vec3& p, const CameraIntrinsics& k) {
    return {p.x() * k.fx / p.z() + k.cx, p.y() * k.fy / p.z() + k.cy};
}

}  // namespace lumenpoint
