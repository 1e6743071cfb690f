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

#include "lumenpoint/dataset.hpp"
#include "lumenpoint/learner/pointconv.hpp"
#include "lumenpoint/sph.hpp"

#include <json.hpp>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lumenpoint {

inline constexpr int kIrradianceEvalWidth = 64;
inline constexpr int kIrradianceEvalHeight = 32;

// Mean over pixels and channels of the squared difference between the
// irradiance maps of pred and of project_quadrature(truth_env).
double irradiance_map_l2(const ShCoefficients& pred, const EnvironmentMap& truth_env,
                         int width = kIrradianceEvalWidth, int height = kIrradianceEvalHeight);
// Same, with the truth already projected.
double irradiance_map_l2_sh(const ShCoefficients& pred, const ShCoefficients& truth_radiance,
                            int width = kIrradianceEvalWidth, int height = kIrradianceEvalHeight);

// "0.433 (± 0.02)"
std::string format_mean_stderr(double mean, double stderr_);

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;  // sample standard deviation / sqrt(n); 0 for n < 2

    bool operator==(const MeanStderr&) const = default;
};
MeanStderr mean_stderr(std::span<const double> values);

struct EvalReport {
    MeanStderr sh_l2;
    MeanStderr irradiance_l2;
    std::vector<double> sh_l2_per_tuple;
    std::vector<double> irradiance_l2_per_tuple;
    int irradiance_width = kIrradianceEvalWidth;
    int irradiance_height = kIrradianceEvalHeight;

    bool operator==(const EvalReport&) const = default;
};

nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);

using Predictor = std::function<ShCoefficients(const DatasetTuple&)>;

// Scores predict() on every tuple. Tuples are processed in parallel; the
// aggregation order is fixed. Throws InvalidArgument on an empty set.
EvalReport evaluate(const Predictor& predict, std::span<const DatasetTuple> tuples);
EvalReport evaluate(const learner::PointConvModel& model, std::span<const DatasetTuple> tuples);

struct ComplexityReport {
    std::size_t n_points = 0;
    std::size_t params = 0;
    std::size_t macs = 0;
};

// Closed-form parameter and multiply-accumulate counts for one forward pass
// over n_points inputs. Counts the weight nets (per neighbor), the
// feature-kernel aggregation, the block MLPs (per centroid) and the head.
// Bias additions, activations and pooling are not counted.
ComplexityReport count_complexity(const learner::PointConvConfig& cfg, std::size_t n_points);

nlohmann::json to_json(const ComplexityReport& r);

}  // namespace lumenpoint
