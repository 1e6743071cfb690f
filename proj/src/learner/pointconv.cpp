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

#include "lumenpoint/learner/pointconv.hpp"

#include "lumenpoint/error.hpp"
#include "lumenpoint/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace lumenpoint::learner {

namespace {

bool lex_less(const Vec3& a, const Vec3& b) {
    if (a.x() != b.x()) return a.x() < b.x();
    if (a.y() != b.y()) return a.y() < b.y();
    return a.z() < b.z();
}

}  // namespace

PointConvConfig PointConvConfig::standard() {
    PointConvConfig cfg;
    cfg.blocks = {BlockConfig{{64, 128}, 16, 0.2, {8, 16}}, BlockConfig{{128, 256}, 16, 0.25, {8, 8}}};
    cfg.head_widths = {128, 27};
    return cfg;
}

PointConvConfig PointConvConfig::toy() {
    PointConvConfig cfg;
    cfg.blocks = {BlockConfig{{8, 16}, 8, 0.2, {4, 4}}, BlockConfig{{16, 32}, 8, 0.25, {4, 4}}};
    cfg.head_widths = {16, 27};
    return cfg;
}

PointConvConfig PointConvConfig::wide() {
    PointConvConfig cfg;
    cfg.blocks = {BlockConfig{{64, 128}, 16, 1.0, {16, 32}}, BlockConfig{{128, 256}, 16, 0.5, {16, 64}}};
    cfg.head_widths = {512, 256, 27};
    return cfg;
}

void PointConvConfig::validate() const {
    if (blocks.empty()) fail(ErrorCode::InvalidArgument, "model needs at least one pointconv block");
    for (const BlockConfig& b : blocks) {
        if (b.mlp_widths.empty() || b.weightnet_widths.empty())
            fail(ErrorCode::InvalidArgument, "block MLP and weight net widths must be non-empty");
        if (b.neighbors < 1) fail(ErrorCode::InvalidArgument, "neighborhood size must be positive");
        if (!(b.centroid_fraction > 0.0 && b.centroid_fraction <= 1.0))
            fail(ErrorCode::InvalidArgument, "centroid_fraction must lie in (0, 1]");
        for (int w : b.mlp_widths)
            if (w < 1) fail(ErrorCode::InvalidArgument, "layer widths must be positive");
        for (int w : b.weightnet_widths)
            if (w < 1) fail(ErrorCode::InvalidArgument, "layer widths must be positive");
    }
    for (int w : head_widths)
        if (w < 1) fail(ErrorCode::InvalidArgument, "layer widths must be positive");
    if (output_dim() != kShValueCount)
        fail(ErrorCode::InvalidArgument, "model output must have 27 values");
}

nlohmann::json to_json(const PointConvConfig& cfg) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const BlockConfig& b : cfg.blocks)
        blocks.push_back({{"mlp_widths", b.mlp_widths},
                          {"neighbors", b.neighbors},
                          {"centroid_fraction", b.centroid_fraction},
                          {"weightnet_widths", b.weightnet_widths}});
    return {{"blocks", blocks},
            {"head_widths", cfg.head_widths},
            {"xyz_features", cfg.xyz_features},
            {"init_seed", cfg.init_seed}};
}

PointConvConfig config_from_json(const nlohmann::json& j) {
    try {
        PointConvConfig cfg;
        for (const auto& b : j.at("blocks"))
            cfg.blocks.push_back(BlockConfig{b.at("mlp_widths").get<std::vector<int>>(), b.at("neighbors").get<int>(),
                                             b.at("centroid_fraction").get<double>(),
                                             b.at("weightnet_widths").get<std::vector<int>>()});
        cfg.head_widths = j.at("head_widths").get<std::vector<int>>();
        cfg.xyz_features = j.value("xyz_features", false);
        cfg.init_seed = j.value("init_seed", std::uint64_t{0});
        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::FormatError, std::string("malformed model config: ") + e.what());
    }
}

std::size_t centroid_count(std::size_t input_points, double fraction) {
    const auto m = static_cast<std::size_t>(std::llround(static_cast<double>(input_points) * fraction));
    return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(1, input_points));
}

std::vector<std::size_t> farthest_point_sample(const std::vector<Vec3>& pts, std::size_t m) {
    const std::size_t n = pts.size();
    m = std::min(m, n);
    std::vector<std::size_t> out;
    if (m == 0) return out;
    out.reserve(m);

    std::size_t start = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (lex_less(pts[i], pts[start])) start = i;

    std::vector<double> mind(n, std::numeric_limits<double>::infinity());
    std::vector<char> taken(n, 0);
    std::size_t current = start;
    for (std::size_t s = 0; s < m; ++s) {
        out.push_back(current);
        taken[current] = 1;
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            const double d = (pts[i] - pts[current]).squaredNorm();
            if (d < mind[i]) mind[i] = d;
            if (best == n || mind[i] > mind[best] ||
                (mind[i] == mind[best] && lex_less(pts[i], pts[best])))
                best = i;
        }
        if (best == n) break;
        current = best;
    }
    return out;
}

std::vector<std::size_t> k_nearest(const std::vector<Vec3>& pts, const Vec3& query, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> d(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) d[i] = {(pts[i] - query).squaredNorm(), i};
    k = std::min(k, pts.size());
    auto closer = [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        if (pts[a.second] != pts[b.second]) return lex_less(pts[a.second], pts[b.second]);
        return a.second < b.second;
    };
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end(), closer);
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
    return out;
}

CloudGeometry build_geometry(const std::vector<Vec3>& positions, const PointConvConfig& cfg) {
    CloudGeometry geo;
    geo.input_points = positions.size();
    std::vector<Vec3> level = positions;
    for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
        const BlockConfig& bc = cfg.blocks[b];
        const std::size_t k = static_cast<std::size_t>(bc.neighbors);
        if (level.size() < k)
            fail(ErrorCode::TooFewPoints, "block " + std::to_string(b) + " has " + std::to_string(level.size()) +
                                              " input points but needs k = " + std::to_string(k));
        const std::size_t m = centroid_count(level.size(), bc.centroid_fraction);
        const std::vector<std::size_t> picks = farthest_point_sample(level, m);

        BlockGeometry bg;
        bg.centroids.reserve(picks.size());
        for (std::size_t i : picks) bg.centroids.push_back(level[i]);
        bg.neighbors.resize(picks.size() * k);
        bg.offsets.resize(picks.size() * k * 3);
        const std::ptrdiff_t sm = static_cast<std::ptrdiff_t>(picks.size());
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t c = 0; c < sm; ++c) {
            const Vec3& q = bg.centroids[static_cast<std::size_t>(c)];
            const auto nn = k_nearest(level, q, k);
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t slot = static_cast<std::size_t>(c) * k + j;
                bg.neighbors[slot] = static_cast<std::int64_t>(nn[j]);
                const Vec3 d = level[nn[j]] - q;
                for (int a = 0; a < 3; ++a) bg.offsets[slot * 3 + static_cast<std::size_t>(a)] = d[a];
            }
        }
        level = bg.centroids;
        geo.blocks.push_back(std::move(bg));
    }
    return geo;
}

PreparedCloud prepare_cloud(const PointCloud& cloud, const PointConvConfig& cfg) {
    std::vector<Vec3> positions;
    positions.reserve(cloud.size());
    for (const Point& p : cloud) positions.push_back(p.position);

    PreparedCloud out;
    out.geometry = build_geometry(positions, cfg);
    const std::size_t f = static_cast<std::size_t>(cfg.input_features());
    out.features = Tensor(cloud.size(), f);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (int c = 0; c < 3; ++c) out.features(i, static_cast<std::size_t>(c)) = cloud[i].color[c];
        if (cfg.xyz_features)
            for (int a = 0; a < 3; ++a) out.features(i, static_cast<std::size_t>(3 + a)) = cloud[i].position[a];
    }
    return out;
}

PointConvModel::PointConvModel(PointConvConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    Rng rng(cfg_.init_seed);
    // Reserve so Parameter addresses stay stable for the tape.
    std::size_t count = 0;
    for (const BlockConfig& b : cfg_.blocks) count += 2 * b.weightnet_widths.size() + b.mlp_widths.size();
    count += 2 * cfg_.head_widths.size();
    params_.reserve(count);

    auto kaiming = [](std::size_t fan_in) { return std::sqrt(6.0 / static_cast<double>(fan_in)); };
    auto bias_bound = [](std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };

    std::size_t in_features = static_cast<std::size_t>(cfg_.input_features());
    for (std::size_t b = 0; b < cfg_.blocks.size(); ++b) {
        const BlockConfig& bc = cfg_.blocks[b];
        const std::string prefix = "block" + std::to_string(b) + ".";
        Block blk;
        std::size_t fan_in = 3;
        for (std::size_t l = 0; l < bc.weightnet_widths.size(); ++l) {
            const auto out = static_cast<std::size_t>(bc.weightnet_widths[l]);
            const std::string name = prefix + "weightnet" + std::to_string(l);
            Linear lin;
            lin.weight = add_param(name + ".weight", fan_in, out, kaiming(fan_in), rng);
            lin.bias = add_param(name + ".bias", 1, out, bias_bound(fan_in), rng);
            blk.weightnet.push_back(lin);
            fan_in = out;
        }
        fan_in = in_features * static_cast<std::size_t>(bc.weightnet_widths.back());
        for (std::size_t l = 0; l < bc.mlp_widths.size(); ++l) {
            const auto out = static_cast<std::size_t>(bc.mlp_widths[l]);
            // The first layer sees a sum over k neighbors, so widen its effective fan-in.
            const std::size_t eff = l == 0 ? fan_in * static_cast<std::size_t>(bc.neighbors) : fan_in;
            Linear lin;
            lin.weight = add_param(prefix + "mlp" + std::to_string(l) + ".weight", fan_in, out, kaiming(eff), rng);
            blk.mlp.push_back(lin);
            fan_in = out;
        }
        in_features = static_cast<std::size_t>(bc.mlp_widths.back());
        blocks_.push_back(std::move(blk));
    }
    std::size_t fan_in = in_features;
    for (std::size_t l = 0; l < cfg_.head_widths.size(); ++l) {
        const auto out = static_cast<std::size_t>(cfg_.head_widths[l]);
        const std::string name = "head" + std::to_string(l);
        Linear lin;
        lin.weight = add_param(name + ".weight", fan_in, out, kaiming(fan_in), rng);
        lin.bias = add_param(name + ".bias", 1, out, bias_bound(fan_in), rng);
        head_.push_back(lin);
        fan_in = out;
    }
}

std::size_t PointConvModel::add_param(const std::string& name, std::size_t rows, std::size_t cols,
                                      double bound, Rng& rng) {
    Tensor v(rows, cols);
    for (double& x : v.values()) x = rng.uniform(-bound, bound);
    params_.emplace_back(name, std::move(v));
    return params_.size() - 1;
}

std::size_t PointConvModel::parameter_count() const {
    std::size_t n = 0;
    for (const Parameter& p : params_) n += p.value.size();
    return n;
}

void PointConvModel::zero_grad() {
    for (Parameter& p : params_) p.zero_grad();
}

Var PointConvModel::apply(Tape& tape, const Linear& layer, Var x) {
    Var y = matmul(x, tape.parameter(params_[layer.weight]));
    if (layer.bias != SIZE_MAX) y = add_bias(y, tape.parameter(params_[layer.bias]));
    return y;
}

Var PointConvModel::block(Tape& tape, std::size_t index, Var features,
                          std::span<const BlockGeometry* const> geometry,
                          std::span<const std::size_t> row_offsets) {
    const Block& blk = blocks_[index];
    const std::size_t k = static_cast<std::size_t>(cfg_.blocks[index].neighbors);

    std::size_t rows = 0;
    for (const BlockGeometry* g : geometry) rows += g->neighbors.size();
    std::vector<std::int64_t> gather;
    gather.reserve(rows);
    Tensor offsets(rows, 3);
    std::size_t r = 0;
    for (std::size_t b = 0; b < geometry.size(); ++b) {
        const BlockGeometry& g = *geometry[b];
        for (std::size_t j = 0; j < g.neighbors.size(); ++j, ++r) {
            gather.push_back(g.neighbors[j] + static_cast<std::int64_t>(row_offsets[b]));
            for (std::size_t a = 0; a < 3; ++a) offsets(r, a) = g.offsets[j * 3 + a];
        }
    }

    Var w = tape.constant(std::move(offsets));
    for (std::size_t l = 0; l < blk.weightnet.size(); ++l) {
        w = apply(tape, blk.weightnet[l], w);
        if (l + 1 < blk.weightnet.size()) w = relu(w);
    }
    Var grouped = gather_rows(features, std::move(gather));
    Var x = pointconv_aggregate(grouped, w, k);
    for (const Linear& lin : blk.mlp) x = relu(apply(tape, lin, x));
    return x;
}

Var PointConvModel::forward(Tape& tape, std::span<const PreparedCloud* const> batch) {
    if (batch.empty()) fail(ErrorCode::InvalidArgument, "forward needs at least one cloud");
    const std::size_t f = static_cast<std::size_t>(cfg_.input_features());
    std::size_t rows = 0;
    for (const PreparedCloud* c : batch) {
        if (c->geometry.blocks.size() != cfg_.blocks.size() || c->features.cols() != f)
            fail(ErrorCode::InvalidArgument, "cloud was prepared for a different model config");
        rows += c->features.rows();
    }
    Tensor input(rows, f);
    std::vector<std::size_t> offsets{0};
    for (const PreparedCloud* c : batch) {
        std::copy_n(c->features.data(), c->features.size(), input.data() + offsets.back() * f);
        offsets.push_back(offsets.back() + c->features.rows());
    }

    Var x = tape.constant(std::move(input));
    std::vector<const BlockGeometry*> geo(batch.size());
    for (std::size_t b = 0; b < cfg_.blocks.size(); ++b) {
        for (std::size_t i = 0; i < batch.size(); ++i) geo[i] = &batch[i]->geometry.blocks[b];
        x = block(tape, b, x, geo, offsets);
        offsets.assign(1, 0);
        for (const BlockGeometry* g : geo) offsets.push_back(offsets.back() + g->centroids.size());
    }
    x = segment_mean(x, offsets);
    for (std::size_t l = 0; l < head_.size(); ++l) {
        x = apply(tape, head_[l], x);
        if (l + 1 < head_.size()) x = relu(x);
    }
    return x;
}

ShCoefficients sh_from_row(const Tensor& out, std::size_t row) {
    if (out.cols() != static_cast<std::size_t>(kShValueCount))
        fail(ErrorCode::InvalidArgument, "model output must have 27 columns");
    return ShCoefficients::from_flat(
        std::span<const double>(out.data() + row * out.cols(), static_cast<std::size_t>(kShValueCount)));
}

ShCoefficients PointConvModel::predict(const PreparedCloud& cloud) const {
    // The tape only copies parameter values; nothing is written without backward().
    auto& self = const_cast<PointConvModel&>(*this);
    Tape tape;
    const PreparedCloud* one[] = {&cloud};
    return sh_from_row(self.forward(tape, one).value(), 0);
}

ShCoefficients PointConvModel::predict(const PointCloud& cloud) const {
    return predict(prepare_cloud(cloud, cfg_));
}

}  // namespace lumenpoint::learner
