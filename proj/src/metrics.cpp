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

#include "lumenpoint/metrics.hpp"

#include "lumenpoint/error.hpp"
#include "lumenpoint/learner/train.hpp"
#include "lumenpoint/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <exception>

namespace lumenpoint {

double irradiance_map_l2_sh(const ShCoefficients& pred, const ShCoefficients& truth_radiance, int width,
                            int height) {
    const IrradianceMap a = reconstruct_irradiance_map(irradiance_sh(pred), width, height);
    const IrradianceMap b = reconstruct_irradiance_map(irradiance_sh(truth_radiance), width, height);
    std::vector<double> sq(a.pixels.size());
    for (std::size_t i = 0; i < sq.size(); ++i) {
        double s = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double d = a.pixels[i][c] - b.pixels[i][c];
            s += d * d;
        }
        sq[i] = s;
    }
    return pairwise_sum(sq) / (3.0 * static_cast<double>(sq.size()));
}

double irradiance_map_l2(const ShCoefficients& pred, const EnvironmentMap& truth_env, int width, int height) {
    return irradiance_map_l2_sh(pred, project_quadrature(truth_env), width, height);
}

std::string format_mean_stderr(double mean, double stderr_) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f (± %.2f)", mean, stderr_);
    return buf;
}

MeanStderr mean_stderr(std::span<const double> values) {
    MeanStderr out;
    if (values.empty()) return out;
    const double n = static_cast<double>(values.size());
    out.mean = pairwise_sum(values) / n;
    if (values.size() < 2) return out;
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = (values[i] - out.mean) * (values[i] - out.mean);
    out.stderr_ = std::sqrt(pairwise_sum(dev) / (n - 1.0)) / std::sqrt(n);
    return out;
}

nlohmann::json to_json(const EvalReport& r) {
    return {{"sh_l2", {{"mean", r.sh_l2.mean}, {"stderr", r.sh_l2.stderr_},
                       {"formatted", format_mean_stderr(r.sh_l2.mean, r.sh_l2.stderr_)}}},
            {"irradiance_l2", {{"mean", r.irradiance_l2.mean}, {"stderr", r.irradiance_l2.stderr_},
                               {"formatted", format_mean_stderr(r.irradiance_l2.mean, r.irradiance_l2.stderr_)}}},
            {"irradiance_resolution", {r.irradiance_width, r.irradiance_height}},
            {"per_tuple", {{"sh_l2", r.sh_l2_per_tuple}, {"irradiance_l2", r.irradiance_l2_per_tuple}}}};
}

EvalReport report_from_json(const nlohmann::json& j) {
    try {
        EvalReport r;
        r.sh_l2 = {j.at("sh_l2").at("mean").get<double>(), j.at("sh_l2").at("stderr").get<double>()};
        r.irradiance_l2 = {j.at("irradiance_l2").at("mean").get<double>(),
                           j.at("irradiance_l2").at("stderr").get<double>()};
        r.irradiance_width = j.at("irradiance_resolution").at(0).get<int>();
        r.irradiance_height = j.at("irradiance_resolution").at(1).get<int>();
        r.sh_l2_per_tuple = j.at("per_tuple").at("sh_l2").get<std::vector<double>>();
        r.irradiance_l2_per_tuple = j.at("per_tuple").at("irradiance_l2").get<std::vector<double>>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::FormatError, std::string("malformed evaluation report: ") + e.what());
    }
}

EvalReport evaluate(const Predictor& predict, std::span<const DatasetTuple> tuples) {
    if (tuples.empty()) fail(ErrorCode::InvalidArgument, "evaluation needs at least one tuple");
    EvalReport r;
    r.sh_l2_per_tuple.resize(tuples.size());
    r.irradiance_l2_per_tuple.resize(tuples.size());
    std::exception_ptr error;
    const auto n = static_cast<std::ptrdiff_t>(tuples.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            const DatasetTuple& t = tuples[static_cast<std::size_t>(i)];
            const ShCoefficients pred = predict(t);
            r.sh_l2_per_tuple[static_cast<std::size_t>(i)] = learner::sh_l2_loss(pred, t.sh);
            r.irradiance_l2_per_tuple[static_cast<std::size_t>(i)] = irradiance_map_l2(pred, t.env);
        } catch (...) {
#pragma omp critical(lumenpoint_eval_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    r.sh_l2 = mean_stderr(r.sh_l2_per_tuple);
    r.irradiance_l2 = mean_stderr(r.irradiance_l2_per_tuple);
    return r;
}

EvalReport evaluate(const learner::PointConvModel& model, std::span<const DatasetTuple> tuples) {
    return evaluate([&model](const DatasetTuple& t) { return model.predict(t.cloud); }, tuples);
}

ComplexityReport count_complexity(const learner::PointConvConfig& cfg, std::size_t n_points) {
    cfg.validate();
    ComplexityReport r;
    r.n_points = n_points;
    std::size_t n = n_points;
    auto features = static_cast<std::size_t>(cfg.input_features());
    for (const learner::BlockConfig& b : cfg.blocks) {
        const std::size_t m = learner::centroid_count(n, b.centroid_fraction);
        const auto k = static_cast<std::size_t>(b.neighbors);
        std::size_t in = 3;
        for (int w : b.weightnet_widths) {
            const auto out = static_cast<std::size_t>(w);
            r.params += in * out + out;
            r.macs += m * k * in * out;
            in = out;
        }
        const auto kernels = static_cast<std::size_t>(b.weightnet_widths.back());
        r.macs += m * k * features * kernels;
        in = features * kernels;
        for (int w : b.mlp_widths) {
            const auto out = static_cast<std::size_t>(w);
            r.params += in * out;
            r.macs += m * in * out;
            in = out;
        }
        features = static_cast<std::size_t>(b.mlp_widths.back());
        n = m;
    }
    std::size_t in = features;
    for (int w : cfg.head_widths) {
        const auto out = static_cast<std::size_t>(w);
        r.params += in * out + out;
        r.macs += in * out;
        in = out;
    }
    return r;
}

nlohmann::json to_json(const ComplexityReport& r) {
    return {{"n_points", r.n_points},
            {"params", r.params},
            {"macs", r.macs},
            {"params_millions", static_cast<double>(r.params) / 1e6},
            {"macs_millions", static_cast<double>(r.macs) / 1e6}};
}

}  // namespace lumenpoint
