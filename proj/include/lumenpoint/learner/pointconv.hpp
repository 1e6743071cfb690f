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

#include "lumenpoint/learner/autodiff.hpp"
#include "lumenpoint/point_cloud.hpp"
#include "lumenpoint/sph.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace lumenpoint::learner {

struct BlockConfig {
    std::vector<int> mlp_widths{64, 128};
    int neighbors = 16;                  // k
    double centroid_fraction = 0.2;      // centroids = round(fraction * input points)
    std::vector<int> weightnet_widths{8, 16};  // last entry = kernel channels
};

struct PointConvConfig {
    std::vector<BlockConfig> blocks;
    std::vector<int> head_widths{128, 27};
    bool xyz_features = false;  // append absolute coordinates to RGB inputs
    std::uint64_t init_seed = 0;

    // Two blocks with MLPs (64, 128) and (128, 256), k = 16, 1280 -> 256 -> 64
    // centroids, 16 then 8 kernel channels, head (128, 27).
    static PointConvConfig standard();
    // Same layer graph with narrow widths and k = 8, for gradient checks.
    static PointConvConfig toy();
    // Wider preset whose totals land near 1.42 M parameters and 790 M MACs at
    // 1280 points. Totals are approximate and labeled so in reports.
    static PointConvConfig wide();

    int input_features() const { return xyz_features ? 6 : 3; }
    int output_dim() const { return head_widths.empty() ? 0 : head_widths.back(); }

    // Throws InvalidArgument unless blocks are non-empty and the head ends in 27.
    void validate() const;
};

nlohmann::json to_json(const PointConvConfig& cfg);
PointConvConfig config_from_json(const nlohmann::json& j);

std::size_t centroid_count(std::size_t input_points, double fraction);

// Sampling and grouping for one block. Independent of learned weights.
struct BlockGeometry {
    std::vector<Vec3> centroids;            // m
    std::vector<std::int64_t> neighbors;    // m * k, indices into the block input
    std::vector<double> offsets;            // m * k * 3, neighbor - centroid
};

struct CloudGeometry {
    std::size_t input_points = 0;
    std::vector<BlockGeometry> blocks;
};

// Farthest-point sampling starting from the lexicographically smallest
// point; ties go to the lexicographically smallest candidate. The result
// depends only on the set of positions, not their order.
std::vector<std::size_t> farthest_point_sample(const std::vector<Vec3>& pts, std::size_t m);

// k nearest neighbors of `query` in `pts`, ascending by distance, ties broken
// by coordinates and then by lowest index.
std::vector<std::size_t> k_nearest(const std::vector<Vec3>& pts, const Vec3& query, std::size_t k);

// Throws TooFewPoints when a block has fewer inputs than its k.
CloudGeometry build_geometry(const std::vector<Vec3>& positions, const PointConvConfig& cfg);

// Model input prepared once per cloud.
struct PreparedCloud {
    CloudGeometry geometry;
    Tensor features;  // n x input_features
};

PreparedCloud prepare_cloud(const PointCloud& cloud, const PointConvConfig& cfg);

class PointConvModel {
public:
    explicit PointConvModel(PointConvConfig cfg);

    const PointConvConfig& config() const noexcept { return cfg_; }
    std::vector<Parameter>& parameters() noexcept { return params_; }
    const std::vector<Parameter>& parameters() const noexcept { return params_; }
    std::size_t parameter_count() const;

    // Records a batched forward pass; returns (batch x 27).
    Var forward(Tape& tape, std::span<const PreparedCloud* const> batch);

    // Records one pointconv block on already-gathered geometry and returns
    // (m x last mlp width) output features for a batch of clouds.
    Var block(Tape& tape, std::size_t index, Var features,
              std::span<const BlockGeometry* const> geometry, std::span<const std::size_t> row_offsets);

    // Inference only; safe to call concurrently on a shared model.
    ShCoefficients predict(const PreparedCloud& cloud) const;
    ShCoefficients predict(const PointCloud& cloud) const;

    void zero_grad();

private:
    struct Linear {
        std::size_t weight = 0;
        std::size_t bias = SIZE_MAX;  // SIZE_MAX: no bias
    };
    struct Block {
        std::vector<Linear> weightnet;
        std::vector<Linear> mlp;
    };

    std::size_t add_param(const std::string& name, std::size_t rows, std::size_t cols, double bound,
                          Rng& rng);
    Var apply(Tape& tape, const Linear& layer, Var x);

    PointConvConfig cfg_;
    std::vector<Parameter> params_;
    std::vector<Block> blocks_;
    std::vector<Linear> head_;
};

ShCoefficients sh_from_row(const Tensor& out, std::size_t row);

}  // namespace lumenpoint::learner
