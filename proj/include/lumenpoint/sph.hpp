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
#include "lumenpoint/random.hpp"
#include "lumenpoint/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace lumenpoint {

inline constexpr int kShBands = 3;  // l = 0, 1, 2
inline constexpr int kShBasisCount = 9;
inline constexpr int kShChannels = 3;
inline constexpr int kShValueCount = kShBasisCount * kShChannels;

// Position of (l, m) in the basis order
// (0,0) (1,-1) (1,0) (1,1) (2,-2) (2,-1) (2,0) (2,1) (2,2).
constexpr int sh_index(int l, int m) { return l * l + l + m; }

constexpr int sh_band(int index) { return index == 0 ? 0 : (index < 4 ? 1 : 2); }

using ShBasis = std::array<double, kShBasisCount>;

// Order-2 real SH coefficients for three color channels (27 values).
struct ShCoefficients {
    std::array<std::array<double, kShBasisCount>, kShChannels> coeffs{};

    double& operator()(int channel, int index) { return coeffs[channel][index]; }
    double operator()(int channel, int index) const { return coeffs[channel][index]; }

    // Channel-major flattening: r0..r8, g0..g8, b0..b8.
    std::array<double, kShValueCount> flat() const;
    static ShCoefficients from_flat(std::span<const double> values);

    // Throws InvalidArgument on non-finite values.
    void validate() const;

    bool operator==(const ShCoefficients&) const = default;
};

// Orthonormal real SH basis at a unit direction. Throws NotUnit if
// | |dir| - 1 | > 1e-6.
ShBasis sh_basis(const Vec3& dir);

// Same polynomials without the norm check.
ShBasis sh_basis_unchecked(const Vec3& dir);

// Evaluates the expansion at dir for each channel.
std::array<double, 3> sh_evaluate(const ShCoefficients& sh, const Vec3& dir);

// Integral of each basis function over pixel (u, v) of a width x height
// panorama. Summed over all pixels this is exactly the sphere integral.
ShBasis equirect_pixel_basis_integral(int u, int v, int width, int height);

// Projection treating each pixel as constant radiance over its cell, with
// the basis integrated exactly per cell, so a constant panorama has no
// energy above l = 0. Throws MissingPixels if any pixel holds the sentinel.
ShCoefficients project_quadrature(const EnvironmentMap& env);

struct MaskedProjection {
    ShCoefficients coeffs;
    double covered_solid_angle = 0.0;  // steradians
    bool estimated = false;            // true when any pixel was missing
};

// Projection skipping missing pixels, renormalized by 4 pi / covered solid
// angle. Throws MissingPixels if nothing is covered.
MaskedProjection project_quadrature_masked(const EnvironmentMap& env);

struct RadianceSample {
    Vec3 dir = Vec3::UnitZ();
    std::array<double, 3> radiance{};
};

// Monte-Carlo estimate (4 pi / N) sum_i L(i) Y(dir_i) for uniformly
// distributed directions over the full sphere. Throws EmptySamples.
ShCoefficients project_mc(std::span<const RadianceSample> samples);

Vec3 uniform_sphere_direction(Rng& rng);

// n uniform directions with nearest-pixel radiance lookups.
std::vector<RadianceSample> sample_environment_uniform(const EnvironmentMap& env,
                                                       std::size_t n, std::uint64_t seed);

// Lambertian transfer per band.
inline constexpr std::array<double, kShBands> kIrradianceBandScale = {
    std::numbers::pi, 2.0 * std::numbers::pi / 3.0, std::numbers::pi / 4.0};

// Radiance SH to irradiance SH by per-band scaling.
ShCoefficients irradiance_sh(const ShCoefficients& light);

// pixel(u, v) = sum_lm irr_lm Y_lm(dir(u, v)).
IrradianceMap reconstruct_irradiance_map(const ShCoefficients& irr, int width, int height);

// Brute-force cosine-lobe integral of a complete environment map, one output
// direction per pixel of a width x height panorama. O(outputs x inputs).
IrradianceMap diffuse_convolution_oracle(const EnvironmentMap& env, int width, int height);

// Panorama whose pixel centers carry the band-limited expansion `radiance`.
EnvironmentMap synthesize_environment(const ShCoefficients& radiance, int width, int height);

}  // namespace lumenpoint
