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

#include "lumenpoint/point_cloud.hpp"

#include "lumenpoint/error.hpp"
#include "lumenpoint/random.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lumenpoint {

void PointCloud::validate() const {
    for (const Point& p : points_) {
        if (!p.position.allFinite())
            fail(ErrorCode::InvalidArgument, "point cloud holds a non-finite coordinate");
        for (float c : p.color) {
            if (!std::isfinite(c) || c < 0.0f)
                fail(ErrorCode::InvalidArgument, "point cloud holds a negative or non-finite color");
        }
    }
}

void PointCloud::quantize_to_f32() {
    for (Point& p : points_) {
        for (int i = 0; i < 3; ++i) p.position[i] = static_cast<float>(p.position[i]);
    }
}

void check_rotation(const Mat3& rot) {
    if (!rot.allFinite()) fail(ErrorCode::NotARotation, "rotation holds non-finite entries");
    const double ortho = (rot.transpose() * rot - Mat3::Identity()).cwiseAbs().maxCoeff();
    const double det = rot.determinant();
    if (ortho > 1e-6 || std::abs(det - 1.0) > 1e-6)
        fail(ErrorCode::NotARotation, "matrix is not a proper rotation (|R^T R - I| = " +
                                          std::to_string(ortho) + ", det = " + std::to_string(det) + ")");
}

void RenderingRelation::validate() const {
    if (!(scale_factor > 0.0 && scale_factor <= 1.0))
        fail(ErrorCode::InvalidArgument, "scale_factor must lie in (0, 1]");
    if (!pixel_uv.allFinite()) fail(ErrorCode::InvalidArgument, "pixel_uv must be finite");
    check_rotation(rotation);
}

PointCloud recenter(const PointCloud& pc, const RenderingRelation& rel,
                    const CameraIntrinsics& k, double depth_at_uv) {
    if (depth_at_uv == 0.0) fail(ErrorCode::ZeroDepthTarget, "depth at the rendering pixel is zero");
    if (!(depth_at_uv > 0.0) || !std::isfinite(depth_at_uv))
        fail(ErrorCode::InvalidArgument, "depth at the rendering pixel must be positive and finite");
    if (!(rel.scale_factor > 0.0 && rel.scale_factor <= 1.0))
        fail(ErrorCode::InvalidArgument, "scale_factor must lie in (0, 1]");

    const Vec3 target = unproject_pixel(rel.pixel_uv.x(), rel.pixel_uv.y(), depth_at_uv, k);
    const Vec3 shift = rel.scale_factor * target;

    PointCloud out = pc;
    auto& pts = out.points();
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(pts.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) pts[i].position -= shift;
    return out;
}

PointCloud rotate(const PointCloud& pc, const Mat3& rot) {
    check_rotation(rot);
    PointCloud out = pc;
    auto& pts = out.points();
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(pts.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) pts[i].position = rot * pts[i].position;
    return out;
}

PointCloud view_transform(const PointCloud& pc, const RenderingRelation& rel,
                          const CameraIntrinsics& k, double depth_at_uv) {
    rel.validate();
    return rotate(recenter(pc, rel, k, depth_at_uv), rel.rotation);
}

PointCloud downsample_uniform(const PointCloud& pc, std::size_t n, std::uint64_t seed) {
    if (pc.empty()) fail(ErrorCode::EmptyCloud, "cannot downsample an empty point cloud");
    if (n == 0) fail(ErrorCode::InvalidArgument, "sample count must be at least 1");

    const std::size_t total = pc.size();
    const std::size_t keep = std::min(n, total);

    // Partial Fisher-Yates over indices.
    std::vector<std::uint32_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0u);
    Rng rng(seed);
    for (std::size_t i = 0; i < keep; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());

    std::vector<Point> pts;
    pts.reserve(keep);
    for (std::uint32_t i : idx) pts.push_back(pc[i]);
    return PointCloud(std::move(pts));
}

EquirectProjection project_equirect(const PointCloud& pc, int width, int height) {
    if (pc.empty()) fail(ErrorCode::EmptyCloud, "cannot project an empty point cloud");
    EquirectProjection result{EnvironmentMap(width, height, {kMissing, kMissing, kMissing}), 0};

    const std::size_t n = pc.size();
    const std::size_t pixel_count = result.map.pixels().size();
    std::vector<std::int64_t> bin(n);

    const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
        const Vec3& p = pc[static_cast<std::size_t>(i)].position;
        if (p.norm() < 1e-9) {
            bin[i] = -1;
            continue;
        }
        const auto [u, v] = equirect_pixel(p, width, height);
        bin[i] = static_cast<std::int64_t>(v) * width + u;
    }

    // Stable counting sort by pixel keeps points in source order per pixel.
    std::vector<std::size_t> start(pixel_count + 1, 0);
    for (std::int64_t b : bin) {
        if (b < 0) {
            ++result.skipped_at_origin;
            continue;
        }
        ++start[static_cast<std::size_t>(b) + 1];
    }
    std::partial_sum(start.begin(), start.end(), start.begin());
    std::vector<std::size_t> order(start.back());
    {
        std::vector<std::size_t> cursor(start.begin(), start.end() - 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (bin[i] >= 0) order[cursor[static_cast<std::size_t>(bin[i])]++] = i;
        }
    }

    auto& pixels = result.map.pixels();
    const std::ptrdiff_t sp = static_cast<std::ptrdiff_t>(pixel_count);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t px = 0; px < sp; ++px) {
        const std::size_t b = start[px], e = start[px + 1];
        if (b == e) continue;
        double acc[3] = {0.0, 0.0, 0.0};
        for (std::size_t j = b; j < e; ++j) {
            const Rgb& c = pc[order[j]].color;
            for (int ch = 0; ch < 3; ++ch) acc[ch] += c[ch];
        }
        const double count = static_cast<double>(e - b);
        for (int ch = 0; ch < 3; ++ch) pixels[px][ch] = static_cast<float>(acc[ch] / count);
    }
    return result;
}

}  // namespace lumenpoint
