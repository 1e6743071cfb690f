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

#include "lumenpoint/error.hpp"
#include "lumenpoint/learner/autodiff.hpp"
#include "lumenpoint/random.hpp"

#include <cmath>
#include <functional>

using namespace lumenpoint;
using namespace lumenpoint::learner;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng) {
    Tensor t(r, c);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
    return t;
}

// Builds a scalar loss from the parameters. A random projection of the op
// output makes every output element matter.
using Graph = std::function<Var(Tape&, std::vector<Var>&)>;

double evaluate(const Graph& g, std::vector<Parameter>& params) {
    Tape tape;
    std::vector<Var> vars;
    for (Parameter& p : params) vars.push_back(tape.parameter(p));
    return g(tape, vars).value()[0];
}

// Central differences against the tape gradient. Relative error where the
// gradient is non-negligible, absolute error elsewhere.
void check_gradient(const Graph& g, std::vector<Parameter> params, double h = 1e-6) {
    {
        for (Parameter& p : params) p.zero_grad();
        Tape tape;
        std::vector<Var> vars;
        for (Parameter& p : params) vars.push_back(tape.parameter(p));
        tape.backward(g(tape, vars));
    }
    for (Parameter& p : params) {
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double saved = p.value[i];
            p.value[i] = saved + h;
            const double up = evaluate(g, params);
            p.value[i] = saved - h;
            const double down = evaluate(g, params);
            p.value[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double an = p.grad[i];
            INFO(p.name, "[", i, "] analytic ", an, " numeric ", fd);
            if (std::abs(an) > 1e-3)
                CHECK(std::abs(an - fd) <= 1e-4 * std::abs(an));
            else
                CHECK(std::abs(an - fd) <= 1e-7);
        }
    }
}

Var project(Tape& t, Var x, std::uint64_t seed) {
    Rng rng(seed);
    return sum(mul(x, t.constant(random_tensor(x.value().rows(), x.value().cols(), rng))));
}

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("constant loss gives zero gradients") {
    Parameter w("w", Tensor(2, 3, 0.5));
    Tape tape;
    tape.parameter(w);
    tape.backward(tape.constant(Tensor::scalar(7.0)));
    for (double g : w.grad.values()) CHECK(g == 0.0);
}

TEST_CASE("d(w^2)/dw at 3 is 6") {
    Parameter w("w", Tensor::scalar(3.0));
    Tape tape;
    tape.backward(sum(square(tape.parameter(w))));
    CHECK(w.grad[0] == 6.0);
}

TEST_CASE("gradients accumulate across uses") {
    Parameter w("w", Tensor::scalar(2.0));
    Tape tape;
    const Var v = tape.parameter(w);
    tape.backward(sum(add(mul(v, v), scale(v, 3.0))));
    CHECK(w.grad[0] == 7.0);
}

TEST_CASE("a second backward throws") {
    Parameter w("w", Tensor::scalar(1.0));
    Tape tape;
    const Var loss = sum(tape.parameter(w));
    tape.backward(loss);
    CHECK(tape.consumed());
    try {
        tape.backward(loss);
        FAIL("expected GraphConsumed");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GraphConsumed);
    }
}

TEST_CASE("non-scalar loss and shape mismatches are rejected") {
    Parameter a("a", Tensor(2, 2)), b("b", Tensor(3, 2));
    Tape tape;
    const Var va = tape.parameter(a), vb = tape.parameter(b);
    CHECK_THROWS_AS(tape.backward(va), Error);
    Tape t2;
    CHECK_THROWS_AS(add(t2.parameter(a), t2.parameter(b)), Error);
    CHECK_THROWS_AS(matmul(t2.parameter(a), t2.parameter(b)), Error);
    (void)vb;
}

TEST_CASE("finite differences: elementwise ops") {
    Rng rng(1);
    std::vector<Parameter> ps = {{"a", random_tensor(3, 4, rng)}, {"b", random_tensor(3, 4, rng)}};
    check_gradient([](Tape& t, std::vector<Var>& v) { return project(t, add(v[0], v[1]), 1); }, ps);
    check_gradient([](Tape& t, std::vector<Var>& v) { return project(t, sub(v[0], v[1]), 2); }, ps);
    check_gradient([](Tape& t, std::vector<Var>& v) { return project(t, mul(v[0], v[1]), 3); }, ps);
    check_gradient([](Tape& t, std::vector<Var>& v) { return project(t, scale(v[0], -2.5), 4); }, ps);
    check_gradient([](Tape& t, std::vector<Var>& v) { return project(t, square(v[0]), 5); }, ps);
    check_gradient([](Tape&, std::vector<Var>& v) { return mean(square(v[1])); }, ps);
}

TEST_CASE("finite differences: relu away from the kink") {
    Rng rng(2);
    Tensor x = random_tensor(4, 5, rng);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::abs(x[i]) < 0.05) x[i] = 0.3;
    check_gradient([](Tape& t, std::vector<Var>& v) { return project(t, relu(v[0]), 6); }, {{"x", x}});
}

TEST_CASE("finite differences: matmul and bias") {
    Rng rng(3);
    std::vector<Parameter> ps = {
        {"x", random_tensor(5, 3, rng)}, {"w", random_tensor(3, 4, rng)}, {"b", random_tensor(1, 4, rng)}};
    check_gradient(
        [](Tape& t, std::vector<Var>& v) { return project(t, add_bias(matmul(v[0], v[1]), v[2]), 7); }, ps);
}

TEST_CASE("finite differences: gather and segment mean") {
    Rng rng(4);
    std::vector<Parameter> ps = {{"x", random_tensor(6, 3, rng)}};
    check_gradient(
        [](Tape& t, std::vector<Var>& v) { return project(t, gather_rows(v[0], {5, 0, 0, 3, 2, 5, 5}), 8); }, ps);
    check_gradient(
        [](Tape& t, std::vector<Var>& v) { return project(t, segment_mean(v[0], {0, 2, 3, 6}), 9); }, ps);
}

TEST_CASE("finite differences: pointconv aggregation") {
    Rng rng(5);
    const std::size_t groups = 3, k = 4;
    std::vector<Parameter> ps = {{"f", random_tensor(groups * k, 5, rng)}, {"w", random_tensor(groups * k, 2, rng)}};
    check_gradient(
        [&](Tape& t, std::vector<Var>& v) { return project(t, pointconv_aggregate(v[0], v[1], k), 10); }, ps);
}

TEST_CASE("pointconv aggregation matches its definition") {
    Rng rng(6);
    const std::size_t groups = 2, k = 3, C = 4, W = 2;
    const Tensor f = random_tensor(groups * k, C, rng), w = random_tensor(groups * k, W, rng);
    Tape tape;
    const Tensor& out = pointconv_aggregate(tape.constant(f), tape.constant(w), k).value();
    REQUIRE(out.rows() == groups);
    REQUIRE(out.cols() == C * W);
    for (std::size_t g = 0; g < groups; ++g)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t ww = 0; ww < W; ++ww) {
                double s = 0.0;
                for (std::size_t j = 0; j < k; ++j) s += f(g * k + j, c) * w(g * k + j, ww);
                CHECK(out(g, c * W + ww) == doctest::Approx(s).epsilon(1e-14));
            }
}

TEST_CASE("finite differences: a composite two-layer network") {
    Rng rng(7);
    std::vector<Parameter> ps = {{"x", random_tensor(8, 3, rng)},
                                 {"w1", random_tensor(3, 6, rng)},
                                 {"b1", random_tensor(1, 6, rng)},
                                 {"w2", random_tensor(6, 2, rng)}};
    check_gradient(
        [](Tape& t, std::vector<Var>& v) {
            const Var h = relu(add_bias(matmul(v[0], v[1]), v[2]));
            return mean(square(sub(matmul(segment_mean(h, {0, 3, 8}), v[3]), t.constant(Tensor(2, 2, 0.25)))));
        },
        ps);
}

}  // TEST_SUITE
