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

#include "lumenpoint/learner/autodiff.hpp"

#include "lumenpoint/error.hpp"

#include <cmath>
#include <sstream>

namespace lumenpoint::learner {

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : shape_{rows, cols}, values_(std::move(values)) {
    if (values_.size() != rows * cols)
        fail(ErrorCode::InvalidArgument, "tensor value count does not match its shape");
}

bool Tensor::all_finite() const {
    for (double x : values_)
        if (!std::isfinite(x)) return false;
    return true;
}

std::string shape_string(const Tensor& t) {
    std::ostringstream s;
    s << '(' << t.rows() << " x " << t.cols() << ')';
    return s.str();
}

const Tensor& Var::value() const { return tape->value(*this); }

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, {}, {}, nullptr, false});
    return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::parameter(Parameter& p) {
    nodes_.push_back(Node{p.value, {}, {}, {}, &p, true});
    return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(Tensor value, std::vector<int> inputs, Backward back) {
    bool needs = false;
    for (int i : inputs) needs = needs || nodes_[static_cast<std::size_t>(i)].needs_grad;
    nodes_.push_back(Node{std::move(value), {}, std::move(inputs), needs ? std::move(back) : Backward{},
                          nullptr, needs});
    return {this, static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad_of(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.empty() && !n.value.empty()) n.grad = Tensor(n.value.rows(), n.value.cols());
    return n.grad;
}

void Tape::backward(Var loss) {
    if (consumed_) fail(ErrorCode::GraphConsumed, "backward already ran on this graph; record a new forward pass");
    if (loss.tape != this) fail(ErrorCode::InvalidArgument, "loss belongs to a different tape");
    const Tensor& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1)
        fail(ErrorCode::InvalidArgument, "backward needs a 1 x 1 loss, got " + shape_string(lv));
    consumed_ = true;
    if (!nodes_[static_cast<std::size_t>(loss.id)].needs_grad) return;

    grad_of(loss.id)[0] = 1.0;
    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.needs_grad || n.grad.empty()) continue;
        if (n.back) n.back(*this, n.grad);
        if (n.param) n.param->grad.matrix() += n.grad.matrix();
    }
}

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        fail(ErrorCode::InvalidArgument,
             std::string(op) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
}

}  // namespace

Var add(Var a, Var b) {
    Tape& t = *a.tape;
    require_same(a.value(), b.value(), "add");
    Tensor out = a.value();
    out.matrix() += b.value().matrix();
    const int ia = a.id, ib = b.id;
    return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
        if (t.needs_grad(ia)) t.grad_of(ia).matrix() += g.matrix();
        if (t.needs_grad(ib)) t.grad_of(ib).matrix() += g.matrix();
    });
}

Var sub(Var a, Var b) {
    Tape& t = *a.tape;
    require_same(a.value(), b.value(), "sub");
    Tensor out = a.value();
    out.matrix() -= b.value().matrix();
    const int ia = a.id, ib = b.id;
    return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
        if (t.needs_grad(ia)) t.grad_of(ia).matrix() += g.matrix();
        if (t.needs_grad(ib)) t.grad_of(ib).matrix() -= g.matrix();
    });
}

Var mul(Var a, Var b) {
    Tape& t = *a.tape;
    require_same(a.value(), b.value(), "mul");
    Tensor out = a.value();
    out.matrix().array() *= b.value().matrix().array();
    const int ia = a.id, ib = b.id;
    return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
        if (t.needs_grad(ia))
            t.grad_of(ia).matrix().array() += g.matrix().array() * t.value({&t, ib}).matrix().array();
        if (t.needs_grad(ib))
            t.grad_of(ib).matrix().array() += g.matrix().array() * t.value({&t, ia}).matrix().array();
    });
}

Var scale(Var a, double s) {
    Tape& t = *a.tape;
    Tensor out = a.value();
    out.matrix() *= s;
    const int ia = a.id;
    return t.record(std::move(out), {ia}, [ia, s](Tape& t, const Tensor& g) {
        t.grad_of(ia).matrix() += s * g.matrix();
    });
}

Var square(Var a) {
    Tape& t = *a.tape;
    Tensor out = a.value();
    out.matrix().array() = out.matrix().array().square();
    const int ia = a.id;
    return t.record(std::move(out), {ia}, [ia](Tape& t, const Tensor& g) {
        t.grad_of(ia).matrix().array() += 2.0 * g.matrix().array() * t.value({&t, ia}).matrix().array();
    });
}

Var sum(Var a) {
    Tape& t = *a.tape;
    double s = 0.0;
    for (double x : a.value().values()) s += x;
    const int ia = a.id;
    return t.record(Tensor::scalar(s), {ia}, [ia](Tape& t, const Tensor& g) {
        t.grad_of(ia).matrix().array() += g[0];
    });
}

Var mean(Var a) {
    const double n = static_cast<double>(a.value().size());
    return scale(sum(a), 1.0 / n);
}

Var matmul(Var a, Var b) {
    Tape& t = *a.tape;
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.cols() != bv.rows())
        fail(ErrorCode::InvalidArgument, "matmul: inner dimensions differ " + shape_string(av) + " x " +
                                             shape_string(bv));
    Tensor out(av.rows(), bv.cols());
    out.matrix().noalias() = av.matrix() * bv.matrix();
    const int ia = a.id, ib = b.id;
    return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
        if (t.needs_grad(ia))
            t.grad_of(ia).matrix().noalias() += g.matrix() * t.value({&t, ib}).matrix().transpose();
        if (t.needs_grad(ib))
            t.grad_of(ib).matrix().noalias() += t.value({&t, ia}).matrix().transpose() * g.matrix();
    });
}

Var add_bias(Var a, Var bias) {
    Tape& t = *a.tape;
    const Tensor& bv = bias.value();
    if (bv.rows() != 1 || bv.cols() != a.value().cols())
        fail(ErrorCode::InvalidArgument, "add_bias: bias must be 1 x " + std::to_string(a.value().cols()));
    Tensor out = a.value();
    out.matrix().rowwise() += bv.matrix().row(0);
    const int ia = a.id, ib = bias.id;
    return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& t, const Tensor& g) {
        if (t.needs_grad(ia)) t.grad_of(ia).matrix() += g.matrix();
        if (!t.needs_grad(ib)) return;
        // Fixed row order; Eigen's colwise sum vectorizes by buffer alignment,
        // which changes the rounding from run to run.
        Tensor& gb = t.grad_of(ib);
        const std::size_t rows = g.rows(), cols = g.cols();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
    });
}

Var relu(Var a) {
    Tape& t = *a.tape;
    Tensor out = a.value();
    out.matrix() = out.matrix().cwiseMax(0.0);
    const int ia = a.id, self = static_cast<int>(t.size());
    return t.record(std::move(out), {ia}, [ia, self](Tape& t, const Tensor& g) {
        const Tensor& y = t.value({&t, self});
        Tensor& ga = t.grad_of(ia);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (y[i] > 0.0) ga[i] += g[i];
    });
}

Var gather_rows(Var a, std::vector<std::int64_t> rows) {
    Tape& t = *a.tape;
    const Tensor& av = a.value();
    const std::size_t cols = av.cols();
    Tensor out(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= av.rows())
            fail(ErrorCode::InvalidArgument, "gather_rows: index out of range");
        std::copy_n(av.data() + static_cast<std::size_t>(rows[i]) * cols, cols, out.data() + i * cols);
    }
    const int ia = a.id;
    return t.record(std::move(out), {ia}, [ia, rows = std::move(rows), cols](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad_of(ia);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double* dst = ga.data() + static_cast<std::size_t>(rows[i]) * cols;
            const double* src = g.data() + i * cols;
            for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
        }
    });
}

Var pointconv_aggregate(Var features, Var weights, std::size_t k) {
    Tape& t = *features.tape;
    const Tensor& f = features.value();
    const Tensor& w = weights.value();
    if (k == 0 || f.rows() != w.rows() || f.rows() % k != 0)
        fail(ErrorCode::InvalidArgument, "pointconv_aggregate: rows must be equal multiples of k");
    const std::size_t groups = f.rows() / k, c = f.cols(), wc = w.cols();
    Tensor out(groups, c * wc);

    using Map = Eigen::Map<const RowMatrix>;
    using MutMap = Eigen::Map<RowMatrix>;
    const auto ei = [](std::size_t x) { return static_cast<Eigen::Index>(x); };
    const std::ptrdiff_t sg = static_cast<std::ptrdiff_t>(groups);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t gi = 0; gi < sg; ++gi) {
        const std::size_t g = static_cast<std::size_t>(gi);
        Map fg(f.data() + g * k * c, ei(k), ei(c));
        Map wg(w.data() + g * k * wc, ei(k), ei(wc));
        MutMap og(out.data() + g * c * wc, ei(c), ei(wc));
        og.noalias() = fg.transpose() * wg;
    }

    const int i_f = features.id, i_w = weights.id;
    return t.record(std::move(out), {i_f, i_w}, [=](Tape& t, const Tensor& grad) {
        const Tensor& fv = t.value({&t, i_f});
        const Tensor& wv = t.value({&t, i_w});
        const bool want_f = t.needs_grad(i_f), want_w = t.needs_grad(i_w);
        Tensor* gf = want_f ? &t.grad_of(i_f) : nullptr;
        Tensor* gw = want_w ? &t.grad_of(i_w) : nullptr;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t gi = 0; gi < sg; ++gi) {
            const std::size_t g = static_cast<std::size_t>(gi);
            Map gg(grad.data() + g * c * wc, ei(c), ei(wc));
            if (want_f) {
                Map wg(wv.data() + g * k * wc, ei(k), ei(wc));
                MutMap dst(gf->data() + g * k * c, ei(k), ei(c));
                dst.noalias() += wg * gg.transpose();
            }
            if (want_w) {
                Map fg(fv.data() + g * k * c, ei(k), ei(c));
                MutMap dst(gw->data() + g * k * wc, ei(k), ei(wc));
                dst.noalias() += fg * gg;
            }
        }
    });
}

Var segment_mean(Var a, std::vector<std::size_t> offsets) {
    Tape& t = *a.tape;
    const Tensor& av = a.value();
    if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != av.rows())
        fail(ErrorCode::InvalidArgument, "segment_mean: offsets must span all rows");
    const std::size_t segs = offsets.size() - 1, cols = av.cols();
    Tensor out(segs, cols);
    for (std::size_t s = 0; s < segs; ++s) {
        const std::size_t b = offsets[s], e = offsets[s + 1];
        if (e <= b) fail(ErrorCode::InvalidArgument, "segment_mean: empty segment");
        for (std::size_t r = b; r < e; ++r)
            for (std::size_t c = 0; c < cols; ++c) out(s, c) += av(r, c);
        for (std::size_t c = 0; c < cols; ++c) out(s, c) /= static_cast<double>(e - b);
    }
    const int ia = a.id;
    return t.record(std::move(out), {ia}, [ia, offsets = std::move(offsets), cols](Tape& t, const Tensor& g) {
        Tensor& ga = t.grad_of(ia);
        for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
            const double inv = 1.0 / static_cast<double>(offsets[s + 1] - offsets[s]);
            for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r)
                for (std::size_t c = 0; c < cols; ++c) ga(r, c) += g(s, c) * inv;
        }
    });
}

}  // namespace lumenpoint::learner
