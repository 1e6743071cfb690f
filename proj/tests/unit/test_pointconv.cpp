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

#include <doctest.h>

#include "helpers.hpp"
#include "lumenpoint/error.hpp"
#include "lumenpoint/learner/checkpoint.hpp"
#include "lumenpoint/learner/pointconv.hpp"
#include "lumenpoint/learner/train.hpp"
#include "lumenpoint/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

using namespace lumenpoint;
using namespace lumenpoint::learner;

namespace {

const Tensor& param(const PointConvModel& m, const std::string& name) {
    for (const Parameter& p : m.parameters())
        if (p.name == name) return p.value;
    FAIL("no parameter " << name);
    static Tensor none;
    return none;
}

std::vector<Vec3> positions(const PointCloud& pc) {
    std::vector<Vec3> out;
    for (const Point& p : pc) out.push_back(p.position);
    return out;
}

// Straightforward loops over one block: weight net per neighbor, weighted
// feature sum per centroid, then the MLP.
std::vector<std::vector<double>> naive_block(const PointConvModel& model, std::size_t b,
                                            const std::vector<std::vector<double>>& features,
                                            const BlockGeometry& geo) {
    const BlockConfig& bc = model.config().blocks[b];
    const std::string prefix = "block" + std::to_string(b) + ".";
    const std::size_t k = std::size_t(bc.neighbors);
    const std::size_t C = features[0].size();
    const std::size_t W = std::size_t(bc.weightnet_widths.back());
    std::vector<std::vector<double>> out;
    for (std::size_t g = 0; g < geo.centroids.size(); ++g) {
        std::vector<double> agg(C * W, 0.0);
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<double> h(geo.offsets.begin() + long((g * k + j) * 3),
                                  geo.offsets.begin() + long((g * k + j) * 3 + 3));
            for (std::size_t l = 0; l < bc.weightnet_widths.size(); ++l) {
                const Tensor& w = param(model, prefix + "weightnet" + std::to_string(l) + ".weight");
                const Tensor& bias = param(model, prefix + "weightnet" + std::to_string(l) + ".bias");
                std::vector<double> next(w.cols());
                for (std::size_t o = 0; o < w.cols(); ++o) {
                    double s = bias(0, o);
                    for (std::size_t i = 0; i < w.rows(); ++i) s += h[i] * w(i, o);
                    next[o] = l + 1 < bc.weightnet_widths.size() ? std::max(s, 0.0) : s;
                }
                h = next;
            }
            const auto& f = features[std::size_t(geo.neighbors[g * k + j])];
            for (std::size_t c = 0; c < C; ++c)
                for (std::size_t w = 0; w < W; ++w) agg[c * W + w] += f[c] * h[w];
        }
        std::vector<double> x = agg;
        for (std::size_t l = 0; l < bc.mlp_widths.size(); ++l) {
            const Tensor& w = param(model, prefix + "mlp" + std::to_string(l) + ".weight");
            std::vector<double> next(w.cols());
            for (std::size_t o = 0; o < w.cols(); ++o) {
                double s = 0.0;
                for (std::size_t i = 0; i < w.rows(); ++i) s += x[i] * w(i, o);
                next[o] = std::max(s, 0.0);
            }
            x = next;
        }
        out.push_back(x);
    }
    return out;
}

Tensor run_block(PointConvModel& model, std::size_t b, const Tensor& features, const BlockGeometry& geo) {
    Tape tape;
    const BlockGeometry* g[] = {&geo};
    const std::size_t offsets[] = {0};
    return model.block(tape, b, tape.constant(features), g, offsets).value();
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("pointconv") {

TEST_CASE("standard preset shape") {
    const PointConvConfig cfg = PointConvConfig::standard();
    REQUIRE(cfg.blocks.size() == 2);
    CHECK(cfg.blocks[0].mlp_widths == std::vector<int>{64, 128});
    CHECK(cfg.blocks[1].mlp_widths == std::vector<int>{128, 256});
    CHECK(cfg.output_dim() == 27);
    CHECK(centroid_count(1280, cfg.blocks[0].centroid_fraction) == 256);
    CHECK(centroid_count(256, cfg.blocks[1].centroid_fraction) == 64);
    const PreparedCloud pc = prepare_cloud(lptest::random_cloud(1280, 1), cfg);
    CHECK(pc.geometry.blocks[0].centroids.size() == 256);
    CHECK(pc.geometry.blocks[1].centroids.size() == 64);
    CHECK(pc.geometry.blocks[0].neighbors.size() == 256 * 16);
}

TEST_CASE("config validation and JSON round trip") {
    for (const PointConvConfig& cfg :
         {PointConvConfig::standard(), PointConvConfig::toy(), PointConvConfig::wide()}) {
        const PointConvConfig back = config_from_json(to_json(cfg));
        CHECK(to_json(back) == to_json(cfg));
    }
    PointConvConfig bad = PointConvConfig::toy();
    bad.head_widths.back() = 26;
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
    bad = PointConvConfig::toy();
    bad.blocks.clear();
    CHECK(code_of([&] { bad.validate(); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("block matches a naive loop implementation") {
    PointConvConfig cfg = PointConvConfig::toy();
    cfg.init_seed = 3;
    REQUIRE(cfg.blocks[0].neighbors == 8);
    PointConvModel model(cfg);
    const PointCloud pc = lptest::random_cloud(64, 2);
    const CloudGeometry geo = build_geometry(positions(pc), cfg);
    const PreparedCloud prepared = prepare_cloud(pc, cfg);

    std::vector<std::vector<double>> feats;
    for (const Point& p : pc) feats.push_back({p.color[0], p.color[1], p.color[2]});
    const Tensor fast = run_block(model, 0, prepared.features, geo.blocks[0]);
    const auto slow = naive_block(model, 0, feats, geo.blocks[0]);
    REQUIRE(fast.rows() == slow.size());
    REQUIRE(fast.cols() == slow[0].size());
    double worst = 0.0;
    for (std::size_t g = 0; g < slow.size(); ++g)
        for (std::size_t c = 0; c < slow[g].size(); ++c) worst = std::max(worst, std::abs(fast(g, c) - slow[g][c]));
    CHECK(worst <= 1e-9);

    // Second block on the first block's output.
    std::vector<std::vector<double>> mid(fast.rows(), std::vector<double>(fast.cols()));
    for (std::size_t g = 0; g < fast.rows(); ++g)
        for (std::size_t c = 0; c < fast.cols(); ++c) mid[g][c] = fast(g, c);
    const Tensor fast2 = run_block(model, 1, fast, geo.blocks[1]);
    const auto slow2 = naive_block(model, 1, mid, geo.blocks[1]);
    for (std::size_t g = 0; g < slow2.size(); ++g)
        for (std::size_t c = 0; c < slow2[g].size(); ++c) CHECK(std::abs(fast2(g, c) - slow2[g][c]) <= 1e-9);
}

TEST_CASE("grouping uses true nearest neighbors") {
    const PointConvConfig cfg = PointConvConfig::toy();
    const PointCloud pc = lptest::random_cloud(64, 8);
    const std::vector<Vec3> pts = positions(pc);
    const CloudGeometry geo = build_geometry(pts, cfg);
    const BlockGeometry& b = geo.blocks[0];
    const std::size_t k = 8;
    for (std::size_t g = 0; g < b.centroids.size(); ++g) {
        std::vector<double> d;
        for (const Vec3& p : pts) d.push_back((p - b.centroids[g]).squaredNorm());
        std::vector<double> sorted = d;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t idx = std::size_t(b.neighbors[g * k + j]);
            CHECK(d[idx] == sorted[j]);
            for (int a = 0; a < 3; ++a) CHECK(b.offsets[(g * k + j) * 3 + a] == pts[idx][a] - b.centroids[g][a]);
        }
        // Centroids are input points, so the nearest neighbor is the centroid itself.
        CHECK(sorted[0] == 0.0);
    }
}

TEST_CASE("farthest point sampling ignores input order") {
    const std::vector<Vec3> pts = positions(lptest::random_cloud(100, 4));
    std::vector<Vec3> shuffled = pts;
    Rng rng(1);
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
    const auto a = farthest_point_sample(pts, 20);
    const auto b = farthest_point_sample(shuffled, 20);
    for (std::size_t i = 0; i < 20; ++i) CHECK(pts[a[i]] == shuffled[b[i]]);
    std::vector<std::size_t> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
}

TEST_CASE("zero features give zero block output") {
    const PointConvConfig cfg = PointConvConfig::toy();
    PointConvModel model(cfg);
    const PointCloud pc = lptest::random_cloud(64, 5);
    const CloudGeometry geo = build_geometry(positions(pc), cfg);
    const Tensor out = run_block(model, 0, Tensor(64, 3), geo.blocks[0]);
    for (double x : out.values()) CHECK(x == 0.0);
}

TEST_CASE("translation leaves the prediction unchanged") {
    PointConvModel model(PointConvConfig::standard());
    const PointCloud pc = lptest::random_cloud(1280, 6);
    PointCloud moved = pc;
    for (Point& p : moved.points()) p.position += Vec3(0.5, -0.25, 1.0);
    const ShCoefficients a = model.predict(pc), b = model.predict(moved);
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 9; ++i) CHECK(std::abs(a(c, i) - b(c, i)) <= 1e-12 * std::max(1.0, std::abs(a(c, i))));
}

TEST_CASE("permuting the input points leaves the prediction unchanged") {
    PointConvModel model(PointConvConfig::standard());
    const PointCloud pc = lptest::random_cloud(1280, 7);
    std::vector<std::size_t> order(pc.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(2);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    PointCloud perm;
    for (std::size_t i : order) perm.push_back(pc[i]);
    const ShCoefficients a = model.predict(pc), b = model.predict(perm);
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 9; ++i) CHECK(std::abs(a(c, i) - b(c, i)) <= 1e-9);
}

TEST_CASE("forward is deterministic and finite") {
    PointConvConfig cfg = PointConvConfig::standard();
    cfg.init_seed = 11;
    PointConvModel m1(cfg), m2(cfg);
    const PointCloud pc = lptest::random_cloud(1280, 9);
    const ShCoefficients a = m1.predict(pc), b = m1.predict(pc), c = m2.predict(pc);
    CHECK(a == b);
    CHECK(a == c);
    for (const auto& ch : a.coeffs)
        for (double x : ch) CHECK(std::isfinite(x));
    cfg.init_seed = 12;
    CHECK_FALSE(PointConvModel(cfg).predict(pc) == a);
}

TEST_CASE("batched forward equals one-at-a-time prediction") {
    PointConvModel model(PointConvConfig::toy());
    const PreparedCloud p1 = prepare_cloud(lptest::random_cloud(200, 1), model.config());
    const PreparedCloud p2 = prepare_cloud(lptest::random_cloud(150, 2), model.config());
    Tape tape;
    const PreparedCloud* batch[] = {&p1, &p2};
    const Tensor out = model.forward(tape, batch).value();
    // Batching changes matrix sizes and so Eigen's blocking; allow rounding.
    for (std::size_t row = 0; row < 2; ++row) {
        const ShCoefficients a = sh_from_row(out, row), b = model.predict(row == 0 ? p1 : p2);
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 9; ++i) CHECK(std::abs(a(c, i) - b(c, i)) <= 1e-12);
    }
}

TEST_CASE("too few points") {
    const PointConvConfig cfg = PointConvConfig::standard();
    CHECK(code_of([&] { prepare_cloud(lptest::random_cloud(15, 1), cfg); }) == ErrorCode::TooFewPoints);
    // 40 inputs leave 8 centroids for a block with k = 16.
    CHECK(code_of([&] { prepare_cloud(lptest::random_cloud(40, 1), cfg); }) == ErrorCode::TooFewPoints);
    CHECK_NOTHROW(prepare_cloud(lptest::random_cloud(320, 1), cfg));
}

TEST_CASE("parameter count agrees with the complexity model") {
    for (const PointConvConfig& cfg :
         {PointConvConfig::standard(), PointConvConfig::toy(), PointConvConfig::wide()}) {
        const PointConvModel m(cfg);
        CHECK(m.parameter_count() == count_complexity(cfg, 1280).params);
    }
    CHECK(PointConvModel(PointConvConfig::standard()).parameter_count() == 211763);
}

TEST_CASE("finite-difference gradients of the full model") {
    PointConvConfig cfg = PointConvConfig::toy();
    cfg.init_seed = 5;
    PointConvModel model(cfg);
    const PreparedCloud cloud = prepare_cloud(lptest::random_cloud(80, 3), cfg);
    const Tensor target(1, 27, 0.3);
    auto loss_of = [&]() {
        Tape tape;
        const PreparedCloud* one[] = {&cloud};
        return sh_l2_loss(model.forward(tape, one), target).value()[0];
    };
    model.zero_grad();
    {
        Tape tape;
        const PreparedCloud* one[] = {&cloud};
        tape.backward(sh_l2_loss(model.forward(tape, one), target));
    }
    const double h = 1e-5;
    double worst = 0.0;
    std::size_t checked = 0, kinks = 0;
    for (Parameter& p : model.parameters()) {
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double an = p.grad[i];
            const double saved = p.value[i];
            p.value[i] = saved + h;
            const double up = loss_of();
            p.value[i] = saved - h;
            const double down = loss_of();
            p.value[i] = saved;
            if (std::abs(an) <= 1e-8) continue;
            const double rel = std::abs((up - down) / (2 * h) - an) / std::abs(an);
            // A ReLU switching inside [-h, h] makes the difference quotient
            // meaningless; count those separately.
            if (rel > 1e-4) {
                ++kinks;
                INFO(p.name, "[", i, "] rel ", rel);
                CHECK(rel <= 1e-4);
            }
            worst = std::max(worst, rel);
            ++checked;
        }
    }
    MESSAGE("checked ", checked, " gradients, worst relative error ", worst);
    CHECK(checked > 1000);
    CHECK(kinks == 0);
}

TEST_CASE("checkpoint round trip") {
    PointConvConfig cfg = PointConvConfig::toy();
    cfg.init_seed = 21;
    const PointConvModel model(cfg);
    const auto bytes = encode_checkpoint(model, {{"steps", 10}});
    nlohmann::json meta;
    const PointConvModel back = decode_checkpoint(bytes, &meta);
    CHECK(meta["steps"] == 10);
    REQUIRE(back.parameters().size() == model.parameters().size());
    for (std::size_t i = 0; i < model.parameters().size(); ++i) {
        CHECK(back.parameters()[i].name == model.parameters()[i].name);
        CHECK(back.parameters()[i].value == model.parameters()[i].value);
    }
    CHECK(to_json(back.config()) == to_json(model.config()));
    CHECK(std::memcmp(bytes.data(), "LPTM", 4) == 0);

    const auto dir = lptest::scratch_dir("ckpt");
    save_checkpoint(dir / "m.lptm", model);
    const PointCloud pc = lptest::random_cloud(100, 4);
    CHECK(load_checkpoint(dir / "m.lptm").predict(pc) == model.predict(pc));
}

TEST_CASE("checkpoint errors") {
    const auto bytes = encode_checkpoint(PointConvModel(PointConvConfig::toy()));
    auto wrong_version = bytes;
    wrong_version[4] = std::uint8_t(kCheckpointVersion + 1);
    CHECK(code_of([&] { decode_checkpoint(wrong_version); }) == ErrorCode::FormatVersionMismatch);
    auto truncated = bytes;
    truncated.resize(bytes.size() - 8);
    CHECK(code_of([&] { decode_checkpoint(truncated); }) == ErrorCode::FormatError);
    auto magic = bytes;
    magic[0] = 'X';
    CHECK(code_of([&] { decode_checkpoint(magic); }) == ErrorCode::FormatError);
}

}  // TEST_SUITE
