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

#include "lumenpoint/reference.hpp"

#include "lumenpoint/error.hpp"
#include "lumenpoint/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lumenpoint::reference {

RgbdImage fill_depth(const RgbdImage& img, const DepthFillConfig& cfg) {
    img.validate();
    cfg.validate(img.width(), img.height());
    if (img.valid_depth_count() == 0) fail(ErrorCode::AllDepthMissing, "image has no valid depth");

    const double inv_two_s2 = 1.0 / (2.0 * cfg.spatial_sigma * cfg.spatial_sigma);
    const double inv_two_r2 = 1.0 / (2.0 * cfg.range_sigma * cfg.range_sigma);
    const int r = cfg.window_radius;
    RgbdImage out = img;
    for (int v = 0; v < img.height(); ++v) {
        for (int u = 0; u < img.width(); ++u) {
            if (img.depth(u, v) > 0.0f) continue;
            double wsum = 0.0, dsum = 0.0;
            for (int qv = std::max(0, v - r); qv <= std::min(img.height() - 1, v + r); ++qv) {
                for (int qu = std::max(0, u - r); qu <= std::min(img.width() - 1, u + r); ++qu) {
                    const float dq = img.depth(qu, qv);
                    if (!(dq > 0.0f)) continue;
                    const double du = qu - u, dv = qv - v;
                    double dc2 = 0.0;
                    for (int ch = 0; ch < 3; ++ch) {
                        const double d = static_cast<double>(img.color(qu, qv)[ch]) -
                                         static_cast<double>(img.color(u, v)[ch]);
                        dc2 += d * d;
                    }
                    const double w =
                        std::exp(-(du * du + dv * dv) * inv_two_s2) * std::exp(-dc2 * inv_two_r2);
                    wsum += w;
                    dsum += w * dq;
                }
            }
            out.depth(u, v) = wsum > 0.0 ? static_cast<float>(std::max(0.0, dsum / wsum)) : 0.0f;
        }
    }
    return out;
}

PointCloud unproject(const RgbdImage& img, const CameraIntrinsics& k) {
    img.validate();
    k.validate(img.width(), img.height());
    PointCloud pc;
    pc.reserve(img.valid_depth_count());
    for (int v = 0; v < img.height(); ++v)
        for (int u = 0; u < img.width(); ++u)
            if (const float z = img.depth(u, v); z > 0.0f)
                pc.push_back({unproject_pixel(u, v, z, k), img.color(u, v)});
    return pc;
}

EquirectProjection project_equirect(const PointCloud& pc, int width, int height) {
    if (pc.empty()) fail(ErrorCode::EmptyCloud, "cannot project an empty point cloud");
    EquirectProjection result{EnvironmentMap(width, height, {kMissing, kMissing, kMissing}), 0};
    std::vector<std::array<double, 3>> sum(result.map.pixels().size(), {0.0, 0.0, 0.0});
    std::vector<std::size_t> count(sum.size(), 0);
    for (const Point& p : pc) {
        if (p.position.norm() < 1e-9) {
            ++result.skipped_at_origin;
            continue;
        }
        const auto [u, v] = equirect_pixel(p.position, width, height);
        const std::size_t px = static_cast<std::size_t>(v) * width + u;
        for (int ch = 0; ch < 3; ++ch) sum[px][ch] += p.color[ch];
        ++count[px];
    }
    for (std::size_t px = 0; px < sum.size(); ++px) {
        if (count[px] == 0) continue;
        for (int ch = 0; ch < 3; ++ch)
            result.map.pixels()[px][ch] = static_cast<float>(sum[px][ch] / static_cast<double>(count[px]));
    }
    return result;
}

ShCoefficients project_quadrature(const EnvironmentMap& env) {
    if (env.missing_count() > 0) fail(ErrorCode::MissingPixels, "panorama has missing pixels");
    const int w = env.width(), h = env.height();
    std::vector<double> rows(static_cast<std::size_t>(h) * kShValueCount, 0.0);
    for (int v = 0; v < h; ++v) {
        double* acc = rows.data() + static_cast<std::size_t>(v) * kShValueCount;
        for (int u = 0; u < w; ++u) {
            const ShBasis y = equirect_pixel_basis_integral(u, v, w, h);
            for (int ch = 0; ch < kShChannels; ++ch)
                for (int i = 0; i < kShBasisCount; ++i)
                    acc[ch * kShBasisCount + i] += static_cast<double>(env.at(u, v)[ch]) * y[i];
        }
    }
    std::array<double, kShValueCount> total{};
    pairwise_sum_strided(rows, kShValueCount, total);
    return ShCoefficients::from_flat(total);
}

ShCoefficients project_mc(std::span<const RadianceSample> samples) {
    if (samples.empty()) fail(ErrorCode::EmptySamples, "Monte-Carlo projection needs at least one sample");
    constexpr std::size_t chunk = 256;
    const std::size_t n = samples.size();
    std::vector<double> partial(((n + chunk - 1) / chunk) * kShValueCount, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        double* acc = partial.data() + (s / chunk) * kShValueCount;
        const ShBasis y = sh_basis_unchecked(samples[s].dir);
        for (int ch = 0; ch < kShChannels; ++ch)
            for (int i = 0; i < kShBasisCount; ++i)
                acc[ch * kShBasisCount + i] += samples[s].radiance[ch] * y[i];
    }
    std::array<double, kShValueCount> total{};
    pairwise_sum_strided(partial, kShValueCount, total);
    for (double& x : total) x *= 4.0 * std::numbers::pi / static_cast<double>(n);
    return ShCoefficients::from_flat(total);
}

IrradianceMap reconstruct_irradiance_map(const ShCoefficients& irr, int width, int height) {
    if (width <= 0 || width != 2 * height)
        fail(ErrorCode::InvalidArgument, "irradiance map must satisfy width = 2 * height > 0");
    IrradianceMap out(width, height);
    for (int v = 0; v < height; ++v)
        for (int u = 0; u < width; ++u) out.at(u, v) = sh_evaluate(irr, equirect_direction(u, v, width, height));
    return out;
}

IrradianceMap diffuse_convolution_oracle(const EnvironmentMap& env, int width, int height) {
    if (width <= 0 || width != 2 * height)
        fail(ErrorCode::InvalidArgument, "irradiance map must satisfy width = 2 * height > 0");
    if (!env.complete()) fail(ErrorCode::MissingPixels, "diffuse convolution needs a complete panorama");
    const int ew = env.width(), eh = env.height();
    IrradianceMap out(width, height);
    for (int v = 0; v < height; ++v) {
        for (int u = 0; u < width; ++u) {
            const Vec3 n = equirect_direction(u, v, width, height);
            double acc[3] = {0.0, 0.0, 0.0};
            for (int ev = 0; ev < eh; ++ev) {
                const double d_omega = equirect_pixel_solid_angle(ev, ew, eh);
                for (int eu = 0; eu < ew; ++eu) {
                    const double cosine = n.dot(equirect_direction(eu, ev, ew, eh));
                    if (cosine <= 0.0) continue;
                    for (int ch = 0; ch < 3; ++ch)
                        acc[ch] += (env.at(eu, ev)[ch] * d_omega) * cosine;
                }
            }
            out.at(u, v) = {acc[0], acc[1], acc[2]};
        }
    }
    return out;
}

}  // namespace lumenpoint::reference
