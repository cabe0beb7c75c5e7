// SPDX-License-Identifier: Apache-2.0
//
// Tape-based reverse-mode differentiation over Tensor.
//
// Every op appends one node to the tape; a node's inputs always precede it, so
// backward() is a single sweep in reverse execution order. Parameter leaves
// alias the gradient slot of the caller's Tensor, so gradients from several
// tapes accumulate there until the caller zeroes them.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "iwaqg/tensor.hpp"

namespace iwaqg::ad {

class Tape;

struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
    const Shape& shape() const;
    std::size_t size() const;
    std::span<const double> grad() const;
    double item() const;
};

using BackwardFn = std::function<void(Tape&, std::size_t self)>;

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // A leaf that never receives gradient.
    Var constant(Tensor value);
    // A leaf that receives gradient. Grads are tracked but not written anywhere
    // outside the tape.
    Var variable(Tensor value);
    // A leaf bound to an external parameter tensor. Repeated calls with the same
    // tensor return the same node. The tensor must outlive the tape.
    Var param(Tensor& tensor);

    Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

    // Seeds d(loss)/d(loss) = 1 and propagates in reverse order.
    void backward(Var loss);

    const Tensor& value(std::size_t id) const;
    // Only valid during or after backward().
    std::span<double> grad(std::size_t id);
    std::span<const double> grad(std::size_t id) const;
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_[id].inputs; }
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor* external = nullptr;
        std::vector<double> grad;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        bool requires_grad = false;
    };

    std::vector<Node> nodes_;
    std::unordered_map<const Tensor*, std::size_t> param_ids_;
    bool grads_ready_ = false;
};

// Linear algebra.
Var matmul(Var a, Var b);  // [m x k] * [k x n] -> [m x n];  [m x k] * [k] -> [m]
Var transpose(Var a);

// Elementwise. Shapes must match, or one side must hold a single value.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var sigmoid(Var x);
Var tanh(Var x);
Var relu(Var x);
Var scale(Var x, double factor);
Var add_scalar(Var x, double offset);
Var one_minus(Var x);

// x [n x m] + b [m] broadcast over rows; x [m] + b [m] is a plain add.
Var add_bias(Var x, Var b);

// Max-stabilised softmax. axis indexes the tensor's dimensions.
Var softmax(Var x, std::size_t axis);

struct SegmentMax {
    Var values;
    std::vector<std::size_t> argmax;
};
// values[s] = max over positions in segments[s]; ties go to the lowest index.
SegmentMax segment_max(Var scores, const std::vector<std::vector<std::size_t>>& segments);

// Row gather from a [v x d] table; backward scatter-adds.
Var lookup(Var table, std::span<const std::size_t> ids);

// -log(max(dist[gold], 1e-12)).
Var cross_entropy(Var dist, std::size_t gold);

// Structural ops.
Var concat(std::span<const Var> parts, std::size_t axis = 0);
Var concat(std::initializer_list<Var> parts, std::size_t axis = 0);
Var slice(Var x, std::size_t begin, std::size_t end);  // rank-1
Var row(Var x, std::size_t index);
Var stack_rows(std::span<const Var> rows);
Var gather(Var x, std::span<const std::size_t> index);
Var scatter_sum(Var x, std::span<const std::size_t> targets, std::size_t out_size);
Var sum(Var x);
Var mean_rows(Var x, std::size_t begin, std::size_t end);

inline constexpr double kProbabilityFloor = 1e-12;

}  // namespace iwaqg::ad
