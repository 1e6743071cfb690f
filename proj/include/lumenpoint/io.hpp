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
#include "lumenpoint/imaging.hpp"
#include "lumenpoint/point_cloud.hpp"
#include "lumenpoint/sph.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lumenpoint::io {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_bytes(const fs::path& path);
void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes);

// Lower-case hex SHA-256.
std::string sha256_hex(const std::vector<std::uint8_t>& bytes);
std::string sha256_file(const fs::path& path);

// --- point clouds: "LPC1", u64 count, count x (x, y, z, r, g, b) f32 -------
std::vector<std::uint8_t> encode_lpc(const PointCloud& pc);
PointCloud decode_lpc(const std::vector<std::uint8_t>& bytes);
void write_lpc(const fs::path& path, const PointCloud& pc);
PointCloud read_lpc(const fs::path& path);

// --- RGB-D container: u32 w, u32 h, w*h RGB f32, w*h depth f32 -------------
std::vector<std::uint8_t> encode_rgbd(const RgbdImage& img);
RgbdImage decode_rgbd(const std::vector<std::uint8_t>& bytes);
void write_rgbd(const fs::path& path, const RgbdImage& img);
RgbdImage read_rgbd(const fs::path& path);

// --- PNG ingestion ---------------------------------------------------------
// 8-bit RGB(A) color scaled to [0, 1]; optional sRGB -> linear decode.
std::vector<Rgb> read_color_png(const fs::path& path, int& width, int& height, bool srgb_to_linear);
// 16-bit grayscale depth in millimeters, returned in meters.
std::vector<float> read_depth_png(const fs::path& path, int& width, int& height);
RgbdImage read_rgbd_png(const fs::path& color, const fs::path& depth, bool srgb_to_linear);

void write_color_png(const fs::path& path, int width, int height, const std::vector<std::uint8_t>& rgb);
void write_depth_png(const fs::path& path, int width, int height, const std::vector<std::uint16_t>& mm);

// --- PFM (little-endian float RGB, bottom row first) -------------------------
void write_pfm(const fs::path& path, const EnvironmentMap& env);
void write_pfm(const fs::path& path, const IrradianceMap& irr);
EnvironmentMap read_pfm(const fs::path& path);

// --- JSON --------------------------------------------------------------------
// {"order": 2, "layout": "lm-row-major", "channels": ["r","g","b"], "coeffs": [[9],[9],[9]]}
nlohmann::json sh_to_json(const ShCoefficients& sh);
ShCoefficients sh_from_json(const nlohmann::json& j);
void write_sh_json(const fs::path& path, const ShCoefficients& sh,
                   const nlohmann::json& extra = nlohmann::json::object());
ShCoefficients read_sh_json(const fs::path& path);

nlohmann::json read_json(const fs::path& path);
void write_json(const fs::path& path, const nlohmann::json& j);

nlohmann::json mat3_to_json(const Mat3& m);
Mat3 mat3_from_json(const nlohmann::json& j);

// Accepts {"rotation": [[...],[...],[...]]} or a bare 3x3 array.
Mat3 read_rotation_json(const fs::path& path);

}  // namespace lumenpoint::io
