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

#include "lumenpoint/learner/tensor.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lumenpoint::learner {

// A trainable array. The tape accumulates into `grad` on backward.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v)
        : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

    void zero_grad() { grad.fill(0.0); }
};

class Tape;

// Handle to a recorded value. Cheap to copy; valid while its tape lives.
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    const Tensor& value() const;
};

// Records a computation graph of tensor ops in creation order (which is a
// topological order) and replays it backwards once.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    Var parameter(Parameter& p);

    const Tensor& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
    std::size_t size() const noexcept { return nodes_.size(); }

    // Seeds d loss / d loss = 1 and accumulates into every reachable
    // parameter. The loss must be 1 x 1. A second call throws GraphConsumed.
    void backward(Var loss);

    bool consumed() const noexcept { return consumed_; }

    // Op plumbing. `back` receives the output gradient and writes input
    // gradients through grad_of().
    using Backward = std::function<void(Tape&, const Tensor& out_grad)>;
    Var record(Tensor value, std::vector<int> inputs, Backward back);
    Tensor& grad_of(int id);
    bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::vector<int> inputs;
        Backward back;
        Parameter* param = nullptr;
        bool needs_grad = false;
    };

    std::vector<Node> nodes_;
    bool consumed_ = false;
};

// --- ops ---------------------------------------------------------------------
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);        // elementwise
Var scale(Var a, double s);
Var square(Var a);
Var sum(Var a);               // -> 1 x 1
Var mean(Var a);              // -> 1 x 1
Var matmul(Var a, Var b);     // (n x k) (k x m)
Var add_bias(Var a, Var bias);  // bias is 1 x m, broadcast over rows
Var relu(Var a);

// out[i] = a[rows[i]]
Var gather_rows(Var a, std::vector<std::int64_t> rows);

// Continuous convolution aggregation. features and weights hold groups of k
// consecutive rows (one group per centroid):
//   out[g, c * W + w] = sum_j features[g k + j, c] * weights[g k + j, w]
// giving (groups x C*W).
Var pointconv_aggregate(Var features, Var weights, std::size_t k);

// Row means over consecutive segments; offsets has segments + 1 entries.
Var segment_mean(Var a, std::vector<std::size_t> offsets);

}  // namespace lumenpoint::learner
