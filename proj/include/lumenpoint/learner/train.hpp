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
#include "lumenpoint/learner/pointconv.hpp"
#include "lumenpoint/sph.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lumenpoint::learner {

// (1/9) sum over channels and (l, m) of squared coefficient differences.
double sh_l2_loss(const ShCoefficients& pred, const ShCoefficients& truth);

// Batch mean of the per-row loss for (B x 27) predictions and targets.
Var sh_l2_loss(Var pred, const Tensor& truth);

enum class OptimizerKind { Sgd, Adam };

OptimizerKind optimizer_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t steps = 1000;
    std::size_t batch_size = 8;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::Adam;
    // The step size decays geometrically from learning_rate to
    // learning_rate * final_lr_ratio over the run. 1 keeps it constant.
    double final_lr_ratio = 0.01;

    void validate() const;
};

double scheduled_lr(const TrainConfig& cfg, std::size_t step);

class Optimizer {
public:
    virtual ~Optimizer() = default;
    virtual void step(std::vector<Parameter>& params) = 0;
    virtual void set_learning_rate(double lr) = 0;
};

class Sgd final : public Optimizer {
public:
    explicit Sgd(double lr) : lr_(lr) {}
    void step(std::vector<Parameter>& params) override;
    void set_learning_rate(double lr) override { lr_ = lr; }

private:
    double lr_;
};

class Adam final : public Optimizer {
public:
    // clip > 0 bounds each weight's step to clip * lr.
    explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8, double clip = 1.0)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), clip_(clip) {}
    void step(std::vector<Parameter>& params) override;
    void set_learning_rate(double lr) override { lr_ = lr; }

private:
    double lr_, beta1_, beta2_, eps_, clip_;
    std::vector<Tensor> m_, v_;
    std::size_t t_ = 0;
};

struct TrainingSample {
    PreparedCloud cloud;
    ShCoefficients target;
};

struct TrainResult {
    std::vector<double> loss_curve;  // batch loss before each update
};

using ProgressFn = std::function<void(std::size_t step, double loss)>;

// Mini-batch training. Batches come from a seeded reshuffle per epoch, so the
// loss curve is a pure function of (model init, samples, cfg).
// Throws DivergedLoss if the loss becomes non-finite.
TrainResult train(PointConvModel& model, std::span<const TrainingSample> samples, const TrainConfig& cfg,
                  const ProgressFn& progress = {});

// Mean sh_l2_loss of model predictions over samples.
double evaluate_loss(const PointConvModel& model, std::span<const TrainingSample> samples);

}  // namespace lumenpoint::learner
