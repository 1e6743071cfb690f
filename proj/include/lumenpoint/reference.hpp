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

// Single-threaded reference versions of the parallel kernels. They follow the
// same summation order as the OpenMP implementations, so the two must agree
// bit for bit; tests and the benchmark compare them.

#include "lumenpoint/imaging.hpp"
#include "lumenpoint/point_cloud.hpp"
#include "lumenpoint/sph.hpp"

namespace lumenpoint::reference {

RgbdImage fill_depth(const RgbdImage& img, const DepthFillConfig& cfg);
PointCloud unproject(const RgbdImage& img, const CameraIntrinsics& k);
EquirectProjection project_equirect(const PointCloud& pc, int width, int height);
ShCoefficients project_quadrature(const EnvironmentMap& env);
ShCoefficients project_mc(std::span<const RadianceSample> samples);
IrradianceMap reconstruct_irradiance_map(const ShCoefficients& irr, int width, int height);
IrradianceMap diffuse_convolution_oracle(const EnvironmentMap& env, int width, int height);

}  // namespace lumenpoint::reference
