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

#include "lumenpoint/imaging.hpp"

#include "lumenpoint/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lumenpoint {

void CameraIntrinsics::validate(int width, int height) const {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy))
        fail(ErrorCode::InvalidArgument, "focal lengths must be positive and finite");
    if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height))
        fail(ErrorCode::InvalidArgument, "principal point (" + std::to_string(cx) + ", " +
                                             std::to_string(cy) + ") outside " +
                                             std::to_string(width) + "x" + std::to_string(height) +
                                             " image");
}

RgbdImage::RgbdImage(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) fail(ErrorCode::InvalidArgument, "image dimensions must be positive");
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    color_.assign(n, Rgb{0.0f, 0.0f, 0.0f});
    depth_.assign(n, 0.0f);
}

RgbdImage::RgbdImage(int width, int height, std::vector<Rgb> color, std::vector<float> depth)
    : width_(width), height_(height), color_(std::move(color)), depth_(std::move(depth)) {
    validate();
}

std::size_t RgbdImage::valid_depth_count() const {
    return static_cast<std::size_t>(
        std::count_if(depth_.begin(), depth_.end(), [](float z) { return z > 0.0f; }));
}

void RgbdImage::validate() const {
    const std::size_t n = static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    if (width_ <= 0 || height_ <= 0) fail(ErrorCode::InvalidArgument, "image dimensions must be positive");
    if (color_.size() != n || depth_.size() != n)
        fail(ErrorCode::InvalidArgument, "color and depth dimensions differ");
    for (float z : depth_) {
        if (!std::isfinite(z) || z < 0.0f)
            fail(ErrorCode::InvalidArgument, "depth must be finite and non-negative");
    }
}

void DepthFillConfig::validate(int width, int height) const {
    if (!(spatial_sigma > 0.0) || !(range_sigma > 0.0) || window_radius <= 0)
        fail(ErrorCode::InvalidArgument, "depth fill parameters must be strictly positive");
    if (2 * window_radius > std::min(width, height))
        fail(ErrorCode::InvalidArgument, "window_radius " + std::to_string(window_radius) +
                                             " exceeds half the image size");
}

namespace {

float fill_pixel(const RgbdImage& img, int u, int v, const DepthFillConfig& cfg) {
    const double inv_two_s2 = 1.0 / (2.0 * cfg.spatial_sigma * cfg.spatial_sigma);
    const double inv_two_r2 = 1.0 / (2.0 * cfg.range_sigma * cfg.range_sigma);
    const Rgb& cp = img.color(u, v);
    const int r = cfg.window_radius;
    double wsum = 0.0, dsum = 0.0;
    for (int qv = std::max(0, v - r); qv <= std::min(img.height() - 1, v + r); ++qv) {
        for (int qu = std::max(0, u - r); qu <= std::min(img.width() - 1, u + r); ++qu) {
            const float dq = img.depth(qu, qv);
            if (!(dq > 0.0f)) continue;
            const Rgb& cq = img.color(qu, qv);
            const double du = qu - u, dv = qv - v;
            double dc2 = 0.0;
            for (int ch = 0; ch < 3; ++ch) {
                const double d = static_cast<double>(cq[ch]) - static_cast<double>(cp[ch]);
                dc2 += d * d;
            }
            const double w = std::exp(-(du * du + dv * dv) * inv_two_s2) * std::exp(-dc2 * inv_two_r2);
            wsum += w;
            dsum += w * dq;
        }
    }
    if (!(wsum > 0.0)) return 0.0f;
    return static_cast<float>(std::max(0.0, dsum / wsum));
}

void check_fill_input(const RgbdImage& img, const DepthFillConfig& cfg) {
    img.validate();
    cfg.validate(img.width(), img.height());
    if (img.valid_depth_count() == 0) fail(ErrorCode::AllDepthMissing, "image has no valid depth");
}

std::size_t unproject_row(const RgbdImage& img, int v, const CameraIntrinsics& k, Point* out) {
    std::size_t n = 0;
    for (int u = 0; u < img.width(); ++u) {
        const float z = img.depth(u, v);
        if (!(z > 0.0f)) continue;
        if (out) out[n] = Point{unproject_pixel(u, v, z, k), img.color(u, v)};
        ++n;
    }
    return n;
}

}  // namespace

RgbdImage fill_depth(const RgbdImage& img, const DepthFillConfig& cfg) {
    check_fill_input(img, cfg);
    RgbdImage out = img;
    const int w = img.width(), h = img.height();
#pragma omp parallel for schedule(dynamic, 4)
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            if (img.depth(u, v) > 0.0f) continue;
            out.depth(u, v) = fill_pixel(img, u, v, cfg);
        }
    }
    return out;
}

PointCloud unproject(const RgbdImage& img, const CameraIntrinsics& k) {
    img.validate();
    k.validate(img.width(), img.height());
    const int h = img.height();

    std::vector<std::size_t> offset(static_cast<std::size_t>(h) + 1, 0);
#pragma omp parallel for schedule(static)
    for (int v = 0; v < h; ++v) offset[v + 1] = unproject_row(img, v, k, nullptr);
    std::partial_sum(offset.begin(), offset.end(), offset.begin());

    std::vector<Point> pts(offset.back());
#pragma omp parallel for schedule(static)
    for (int v = 0; v < h; ++v) unproject_row(img, v, k, pts.data() + offset[v]);
    return PointCloud(std::move(pts));
}

}  // namespace lumenpoint
