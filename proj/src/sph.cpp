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

#include "lumenpoint/sph.hpp"

#include "lumenpoint/error.hpp"
#include "lumenpoint/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lumenpoint {

using std::numbers::pi;

namespace {

constexpr double kY00 = 0.28209479177387814;  // 1 / (2 sqrt(pi))
constexpr double kY1 = 0.48860251190291992;   // sqrt(3 / 4pi)
constexpr double kY2 = 1.0925484305920792;    // sqrt(15 / pi) / 2
constexpr double kY20 = 0.31539156525252005;  // sqrt(5 / pi) / 4
constexpr double kY22 = 0.54627421529603959;  // sqrt(15 / pi) / 4

constexpr std::size_t kMcChunk = 256;

void accumulate_row(const EnvironmentMap& env, int v, bool skip_missing, double* acc,
                    std::size_t* covered) {
    std::fill(acc, acc + kShValueCount, 0.0);
    std::size_t count = 0;
    for (int u = 0; u < env.width(); ++u) {
        const Rgb& c = env.at(u, v);
        if (skip_missing && is_missing(c)) continue;
        const ShBasis y = equirect_pixel_basis_integral(u, v, env.width(), env.height());
        for (int ch = 0; ch < kShChannels; ++ch) {
            const double l = c[ch];
            for (int i = 0; i < kShBasisCount; ++i) acc[ch * kShBasisCount + i] += l * y[i];
        }
        ++count;
    }
    if (covered) *covered = count;
}

MaskedProjection project_rows(const EnvironmentMap& env, bool skip_missing) {
    const int h = env.height();
    std::vector<double> rows(static_cast<std::size_t>(h) * kShValueCount);
    std::vector<double> covered(static_cast<std::size_t>(h));
#pragma omp parallel for schedule(static)
    for (int v = 0; v < h; ++v) {
        std::size_t count = 0;
        accumulate_row(env, v, skip_missing, rows.data() + static_cast<std::size_t>(v) * kShValueCount,
                       &count);
        covered[v] = static_cast<double>(count) * equirect_pixel_solid_angle(v, env.width(), h);
    }
    std::array<double, kShValueCount> total{};
    pairwise_sum_strided(rows, kShValueCount, total);

    MaskedProjection out;
    out.coeffs = ShCoefficients::from_flat(total);
    out.covered_solid_angle = pairwise_sum(covered);
    return out;
}

}  // namespace

std::array<double, kShValueCount> ShCoefficients::flat() const {
    std::array<double, kShValueCount> out{};
    for (int c = 0; c < kShChannels; ++c)
        for (int i = 0; i < kShBasisCount; ++i) out[c * kShBasisCount + i] = coeffs[c][i];
    return out;
}

ShCoefficients ShCoefficients::from_flat(std::span<const double> values) {
    if (values.size() != kShValueCount)
        fail(ErrorCode::InvalidArgument,
             "expected 27 SH values, got " + std::to_string(values.size()));
    ShCoefficients sh;
    for (int c = 0; c < kShChannels; ++c)
        for (int i = 0; i < kShBasisCount; ++i) sh.coeffs[c][i] = values[c * kShBasisCount + i];
    return sh;
}

void ShCoefficients::validate() const {
    for (const auto& ch : coeffs)
        for (double x : ch)
            if (!std::isfinite(x)) fail(ErrorCode::InvalidArgument, "SH coefficients must be finite");
}

ShBasis sh_basis_unchecked(const Vec3& d) {
    const double x = d.x(), y = d.y(), z = d.z();
    return {kY00,
            kY1 * y,
            kY1 * z,
            kY1 * x,
            kY2 * x * y,
            kY2 * y * z,
            kY20 * (3.0 * z * z - 1.0),
            kY2 * x * z,
            kY22 * (x * x - y * y)};
}

// Each basis function factors into a latitude part and a longitude part, so
// its integral over a pixel rectangle is closed form. Differences of nearby
// endpoints are written as products to avoid cancellation on small pixels.
ShBasis equirect_pixel_basis_integral(int u, int v, int width, int height) {
    const double dt = 2.0 * pi / width, dp = pi / height;
    const double tm = -pi + (u + 0.5) * dt, th = 0.5 * dt;
    const double pm = 0.5 * pi - (v + 0.5) * dp, ph = 0.5 * dp;
    const double p0 = pm - ph, p1 = pm + ph;
    const double s0 = std::sin(p0), s1 = std::sin(p1), c0 = std::cos(p0), c1 = std::cos(p1);

    const double ds = 2.0 * std::cos(pm) * std::sin(ph);   // s1 - s0
    const double dc = -2.0 * std::sin(pm) * std::sin(ph);  // c1 - c0
    const double a0 = ds;                                                    // cos
    const double a1 = -0.5 * ds * (s1 + s0);                                 // -sin cos
    const double a2 = 0.5 * dp + 0.5 * std::cos(2.0 * pm) * std::sin(dp);    // cos^2
    const double a3 = dc * (c1 * c1 + c1 * c0 + c0 * c0) / 3.0;              // -sin cos^2
    const double a5 = ds * (s1 * s1 + s1 * s0 + s0 * s0) / 3.0;              // sin^2 cos
    const double a4 = ds - a5;                                               // cos^3

    const double b0 = dt;
    const double bs = 2.0 * std::sin(tm) * std::sin(th);                     // sin
    const double bc = 2.0 * std::cos(tm) * std::sin(th);                     // cos
    const double bsc = 0.5 * std::sin(2.0 * tm) * std::sin(dt);              // sin cos
    const double bss = 0.5 * dt - 0.5 * std::cos(2.0 * tm) * std::sin(dt);   // sin^2
    const double bcc = 0.5 * dt + 0.5 * std::cos(2.0 * tm) * std::sin(dt);   // cos^2

    return {kY00 * a0 * b0,
            kY1 * a1 * b0,
            kY1 * a2 * bc,
            kY1 * a2 * bs,
            kY2 * a3 * bs,
            kY2 * a3 * bc,
            kY20 * (3.0 * a4 * bcc - a0 * b0),
            kY2 * a4 * bsc,
            kY22 * (a4 * bss - a5 * b0)};
}

ShBasis sh_basis(const Vec3& dir) {
    const double n = dir.norm();
    if (!(std::abs(n - 1.0) <= 1e-6))
        fail(ErrorCode::NotUnit, "SH basis needs a unit direction, got norm " + std::to_string(n));
    return sh_basis_unchecked(dir);
}

std::array<double, 3> sh_evaluate(const ShCoefficients& sh, const Vec3& dir) {
    const ShBasis y = sh_basis_unchecked(dir);
    std::array<double, 3> out{};
    for (int c = 0; c < kShChannels; ++c) {
        double s = 0.0;
        for (int i = 0; i < kShBasisCount; ++i) s += sh.coeffs[c][i] * y[i];
        out[c] = s;
    }
    return out;
}

ShCoefficients project_quadrature(const EnvironmentMap& env) {
    if (const std::size_t missing = env.missing_count(); missing > 0)
        fail(ErrorCode::MissingPixels, std::to_string(missing) +
                                           " missing pixels; use the mask-aware projection");
    return project_rows(env, false).coeffs;
}

MaskedProjection project_quadrature_masked(const EnvironmentMap& env) {
    MaskedProjection out = project_rows(env, true);
    if (!(out.covered_solid_angle > 0.0))
        fail(ErrorCode::MissingPixels, "panorama has no covered pixels");
    out.estimated = env.missing_count() > 0;
    if (out.estimated) {
        const double scale = 4.0 * pi / out.covered_solid_angle;
        for (auto& ch : out.coeffs.coeffs)
            for (double& x : ch) x *= scale;
    }
    return out;
}

ShCoefficients project_mc(std::span<const RadianceSample> samples) {
    if (samples.empty()) fail(ErrorCode::EmptySamples, "Monte-Carlo projection needs at least one sample");
    const std::size_t n = samples.size();
    const std::size_t chunks = (n + kMcChunk - 1) / kMcChunk;
    std::vector<double> partial(chunks * kShValueCount, 0.0);

    const std::ptrdiff_t sc = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < sc; ++k) {
        double* acc = partial.data() + static_cast<std::size_t>(k) * kShValueCount;
        const std::size_t end = std::min(n, static_cast<std::size_t>(k + 1) * kMcChunk);
        for (std::size_t s = static_cast<std::size_t>(k) * kMcChunk; s < end; ++s) {
            const ShBasis y = sh_basis_unchecked(samples[s].dir);
            for (int ch = 0; ch < kShChannels; ++ch)
                for (int i = 0; i < kShBasisCount; ++i)
                    acc[ch * kShBasisCount + i] += samples[s].radiance[ch] * y[i];
        }
    }
    std::array<double, kShValueCount> total{};
    pairwise_sum_strided(partial, kShValueCount, total);
    const double w = 4.0 * pi / static_cast<double>(n);
    for (double& x : total) x *= w;
    return ShCoefficients::from_flat(total);
}

Vec3 uniform_sphere_direction(Rng& rng) {
    const double z = 1.0 - 2.0 * rng.uniform();
    const double phi = 2.0 * pi * rng.uniform();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

std::vector<RadianceSample> sample_environment_uniform(const EnvironmentMap& env, std::size_t n,
                                                       std::uint64_t seed) {
    if (n == 0) fail(ErrorCode::EmptySamples, "sample count must be at least 1");
    if (!env.complete()) fail(ErrorCode::MissingPixels, "cannot sample a panorama with missing pixels");
    Rng rng(seed);
    std::vector<RadianceSample> out(n);
    for (RadianceSample& s : out) {
        s.dir = uniform_sphere_direction(rng);
        const auto [u, v] = equirect_pixel(s.dir, env.width(), env.height());
        const Rgb& c = env.at(u, v);
        s.radiance = {c[0], c[1], c[2]};
    }
    return out;
}

ShCoefficients irradiance_sh(const ShCoefficients& light) {
    ShCoefficients out;
    for (int c = 0; c < kShChannels; ++c)
        for (int i = 0; i < kShBasisCount; ++i)
            out.coeffs[c][i] = light.coeffs[c][i] * kIrradianceBandScale[sh_band(i)];
    return out;
}

IrradianceMap reconstruct_irradiance_map(const ShCoefficients& irr, int width, int height) {
    if (width <= 0 || width != 2 * height)
        fail(ErrorCode::InvalidArgument, "irradiance map must satisfy width = 2 * height > 0");
    IrradianceMap out(width, height);
#pragma omp parallel for schedule(static)
    for (int v = 0; v < height; ++v)
        for (int u = 0; u < width; ++u) out.at(u, v) = sh_evaluate(irr, equirect_direction(u, v, width, height));
    return out;
}

IrradianceMap diffuse_convolution_oracle(const EnvironmentMap& env, int width, int height) {
    if (width <= 0 || width != 2 * height)
        fail(ErrorCode::InvalidArgument, "irradiance map must satisfy width = 2 * height > 0");
    if (!env.complete()) fail(ErrorCode::MissingPixels, "diffuse convolution needs a complete panorama");

    const int ew = env.width(), eh = env.height();
    const std::size_t m = static_cast<std::size_t>(ew) * static_cast<std::size_t>(eh);
    std::vector<Vec3> dirs(m);
    std::vector<std::array<double, 3>> weighted(m);
    for (int v = 0; v < eh; ++v) {
        const double d_omega = equirect_pixel_solid_angle(v, ew, eh);
        for (int u = 0; u < ew; ++u) {
            const std::size_t j = static_cast<std::size_t>(v) * ew + u;
            dirs[j] = equirect_direction(u, v, ew, eh);
            const Rgb& c = env.at(u, v);
            weighted[j] = {c[0] * d_omega, c[1] * d_omega, c[2] * d_omega};
        }
    }

    IrradianceMap out(width, height);
#pragma omp parallel for schedule(static)
    for (int v = 0; v < height; ++v) {
        for (int u = 0; u < width; ++u) {
            const Vec3 n = equirect_direction(u, v, width, height);
            double acc[3] = {0.0, 0.0, 0.0};
            for (std::size_t j = 0; j < m; ++j) {
                const double cosine = n.dot(dirs[j]);
                if (cosine <= 0.0) continue;
                for (int ch = 0; ch < 3; ++ch) acc[ch] += weighted[j][ch] * cosine;
            }
            out.at(u, v) = {acc[0], acc[1], acc[2]};
        }
    }
    return out;
}

EnvironmentMap synthesize_environment(const ShCoefficients& radiance, int width, int height) {
    EnvironmentMap env(width, height);
#pragma omp parallel for schedule(static)
    for (int v = 0; v < height; ++v) {
        for (int u = 0; u < width; ++u) {
            const auto l = sh_evaluate(radiance, equirect_direction(u, v, width, height));
            env.at(u, v) = {static_cast<float>(l[0]), static_cast<float>(l[1]), static_cast<float>(l[2])};
        }
    }
    return env;
}

}  // namespace lumenpoint
