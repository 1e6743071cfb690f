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

#include "lumenpoint/learner/checkpoint.hpp"

#include "lumenpoint/error.hpp"
#include "lumenpoint/io.hpp"

#include <cstring>

namespace lumenpoint::learner {

std::vector<std::uint8_t> encode_checkpoint(const PointConvModel& model, const nlohmann::json& metadata) {
    nlohmann::json params = nlohmann::json::array();
    for (const Parameter& p : model.parameters())
        params.push_back({{"name", p.name}, {"shape", p.value.shape()}});
    const nlohmann::json header = {
        {"config", to_json(model.config())}, {"parameters", params}, {"metadata", metadata}};
    const std::string text = header.dump();

    std::vector<std::uint8_t> out;
    auto put = [&](const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        out.insert(out.end(), p, p + n);
    };
    put("LPTM", 4);
    put(&kCheckpointVersion, sizeof kCheckpointVersion);
    const std::uint64_t len = text.size();
    put(&len, sizeof len);
    put(text.data(), text.size());
    for (const Parameter& p : model.parameters()) {
        const std::uint64_t count = p.value.size();
        put(&count, sizeof count);
        put(p.value.data(), count * sizeof(double));
    }
    return out;
}

PointConvModel decode_checkpoint(const std::vector<std::uint8_t>& bytes, nlohmann::json* metadata) {
    std::size_t pos = 0;
    auto take = [&](void* dst, std::size_t n) {
        if (bytes.size() - pos < n) fail(ErrorCode::FormatError, "truncated model checkpoint");
        std::memcpy(dst, bytes.data() + pos, n);
        pos += n;
    };
    char magic[4];
    take(magic, 4);
    if (std::memcmp(magic, "LPTM", 4) != 0) fail(ErrorCode::FormatError, "not an LPTM model checkpoint");
    std::uint32_t version = 0;
    take(&version, sizeof version);
    if (version != kCheckpointVersion)
        fail(ErrorCode::FormatVersionMismatch, "checkpoint version " + std::to_string(version) +
                                                   ", expected " + std::to_string(kCheckpointVersion));
    std::uint64_t len = 0;
    take(&len, sizeof len);
    std::string text(len, '\0');
    take(text.data(), len);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::FormatError, std::string("bad checkpoint header: ") + e.what());
    }
    PointConvModel model(config_from_json(header.at("config")));
    const auto& names = header.at("parameters");
    if (names.size() != model.parameters().size())
        fail(ErrorCode::FormatError, "checkpoint parameter list does not match its config");
    for (std::size_t i = 0; i < model.parameters().size(); ++i) {
        Parameter& p = model.parameters()[i];
        if (names[i].at("name").get<std::string>() != p.name)
            fail(ErrorCode::FormatError, "checkpoint parameter order mismatch at " + p.name);
        std::uint64_t count = 0;
        take(&count, sizeof count);
        if (count != p.value.size()) fail(ErrorCode::FormatError, "checkpoint size mismatch for " + p.name);
        take(p.value.data(), count * sizeof(double));
    }
    if (pos != bytes.size()) fail(ErrorCode::FormatError, "trailing bytes in model checkpoint");
    if (metadata) *metadata = header.value("metadata", nlohmann::json::object());
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const PointConvModel& model,
                     const nlohmann::json& metadata) {
    io::write_bytes(path, encode_checkpoint(model, metadata));
}

PointConvModel load_checkpoint(const std::filesystem::path& path, nlohmann::json* metadata) {
    return decode_checkpoint(io::read_bytes(path), metadata);
}

}  // namespace lumenpoint::learner
