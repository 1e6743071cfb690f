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

#include "lumenpoint/learner/pointconv.hpp"

#include <json.hpp>

#include <filesystem>

namespace lumenpoint::learner {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// "LPTM", u32 version, u64 header length, JSON header (config, parameter
// names and shapes, metadata), then per parameter u64 count + f64 values in
// declaration order.
std::vector<std::uint8_t> encode_checkpoint(const PointConvModel& model,
                                            const nlohmann::json& metadata = nlohmann::json::object());
PointConvModel decode_checkpoint(const std::vector<std::uint8_t>& bytes, nlohmann::json* metadata = nullptr);

void save_checkpoint(const std::filesystem::path& path, const PointConvModel& model,
                     const nlohmann::json& metadata = nlohmann::json::object());
PointConvModel load_checkpoint(const std::filesystem::path& path, nlohmann::json* metadata = nullptr);

}  // namespace lumenpoint::learner
