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

#include "lumenpoint/learner/train.hpp"

#include "lumenpoint/error.hpp"
#include "lumenpoint/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lumenpoint::learner {

double sh_l2_loss(const ShCoefficients& pred, const ShCoefficients& truth) {
    double s = 0.0;
    for (int c = 0; c < kShChannels; ++c)
        for (int i = 0; i < kShBasisCount; ++i) {
            const double d = pred(c, i) - truth(c, i);
            s += d * d;
        }
    return s / 9.0;
}

Var sh_l2_loss(Var pred, const Tensor& truth) {
    Tape& tape = *pred.tape;
    if (!pred.value().same_shape(truth) || truth.cols() != static_cast<std::size_t>(kShValueCount))
        fail(ErrorCode::InvalidArgument, "sh_l2_loss: expected matching (B x 27) tensors, got " +
                                             shape_string(pred.value()) + " and " + shape_string(truth));
    const double batch = static_cast<double>(truth.rows());
    return scale(sum(square(sub(pred, tape.constant(truth)))), 1.0 / (9.0 * batch));
}

OptimizerKind optimizer_from_string(const std::string& name) {
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "sgd") return OptimizerKind::Sgd;
    fail(ErrorCode::InvalidArgument, "unknown optimizer '" + name + "' (expected adam or sgd)");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "sgd"; }

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        fail(ErrorCode::InvalidArgument, "learning rate must be finite and non-negative");
    if (steps < 1) fail(ErrorCode::InvalidArgument, "steps must be at least 1");
    if (batch_size < 1) fail(ErrorCode::InvalidArgument, "batch size must be at least 1");
    if (!(final_lr_ratio > 0.0 && final_lr_ratio <= 1.0))
        fail(ErrorCode::InvalidArgument, "final_lr_ratio must lie in (0, 1]");
}

double scheduled_lr(const TrainConfig& cfg, std::size_t step) {
    const double x = static_cast<double>(step) / static_cast<double>(cfg.steps);
    return cfg.learning_rate * std::pow(cfg.final_lr_ratio, x);
}

void Sgd::step(std::vector<Parameter>& params) {
    for (Parameter& p : params) p.value.matrix() -= lr_ * p.grad.matrix();
}

void Adam::step(std::vector<Parameter>& params) {
    if (m_.empty()) {
        for (const Parameter& p : params) {
            m_.emplace_back(p.value.rows(), p.value.cols());
            v_.emplace_back(p.value.rows(), p.value.cols());
        }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Parameter& p = params[i];
        for (std::size_t j = 0; j < p.value.size(); ++j) {
            const double g = p.grad[j];
            m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
            v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
            double u = (m_[i][j] / c1) / (std::sqrt(v_[i][j] / c2) + eps_);
            // A weight whose second moment has decayed takes a step of up to
            // ~3 lr on its next gradient; steady-state steps stay below lr.
            if (clip_ > 0.0) u = std::clamp(u, -clip_, clip_);
            p.value[j] -= lr_ * u;
        }
    }
}

TrainResult train(PointConvModel& model, std::span<const TrainingSample> samples, const TrainConfig& cfg,
                  const ProgressFn& progress) {
    cfg.validate();
    if (samples.empty()) fail(ErrorCode::InvalidArgument, "training set is empty");

    std::unique_ptr<Optimizer> opt;
    if (cfg.optimizer == OptimizerKind::Adam)
        opt = std::make_unique<Adam>(cfg.learning_rate);
    else
        opt = std::make_unique<Sgd>(cfg.learning_rate);

    const std::size_t n = samples.size();
    const std::size_t batch = std::min(cfg.batch_size, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(cfg.seed);
    std::size_t cursor = n;

    TrainResult result;
    result.loss_curve.reserve(cfg.steps);
    std::vector<const PreparedCloud*> clouds(batch);
    Tensor targets(batch, static_cast<std::size_t>(kShValueCount));

    for (std::size_t step = 0; step < cfg.steps; ++step) {
        for (std::size_t b = 0; b < batch; ++b) {
            std::size_t idx;
            if (batch == n) {
                idx = b;
            } else {
                if (cursor == n) {
                    for (std::size_t i = n - 1; i > 0; --i)
                        std::swap(order[i], order[static_cast<std::size_t>(rng.below(i + 1))]);
                    cursor = 0;
                }
                idx = order[cursor++];
            }
            clouds[b] = &samples[idx].cloud;
            const auto flat = samples[idx].target.flat();
            std::copy(flat.begin(), flat.end(), targets.data() + b * static_cast<std::size_t>(kShValueCount));
        }

        Tape tape;
        Var loss = sh_l2_loss(model.forward(tape, clouds), targets);
        const double value = loss.value()[0];
        if (!std::isfinite(value))
            fail(ErrorCode::DivergedLoss, "loss became non-finite at step " + std::to_string(step));
        result.loss_curve.push_back(value);
        if (progress) progress(step, value);

        model.zero_grad();
        tape.backward(loss);
        opt->set_learning_rate(scheduled_lr(cfg, step));
        opt->step(model.parameters());
    }
    return result;
}

double evaluate_loss(const PointConvModel& model, std::span<const TrainingSample> samples) {
    if (samples.empty()) return 0.0;
    double s = 0.0;
    for (const TrainingSample& sample : samples) s += sh_l2_loss(model.predict(sample.cloud), sample.target);
    return s / static_cast<double>(samples.size());
}

}  // namespace lumenpoint::learner
