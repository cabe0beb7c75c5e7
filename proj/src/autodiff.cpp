// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace iwaqg::ad {

const Tensor& Var::value() const { return tape->value(id); }
const Shape& Var::shape() const { return value().shape(); }
std::size_t Var::size() const { return value().size(); }
std::span<const double> Var::grad() const { return std::as_const(*tape).grad(id); }

double Var::item() const {
    const auto& v = value();
    if (v.size() != 1) {
        throw DimensionError("item() needs a single-value tensor, got " + shape_to_string(v.shape()));
    }
    return v[0];
}

Var Tape::constant(Tensor value) {
    Node node;
    node.value = std::move(value);
    nodes_.push_back(std::move(node));
    grads_ready_ = false;
    return {this, nodes_.size() - 1};
}

Var Tape::variable(Tensor value) {
    Var v = constant(std::move(value));
    nodes_.back().requires_grad = true;
    return v;
}

Var Tape::param(Tensor& tensor) {
    if (auto it = param_ids_.find(&tensor); it != param_ids_.end()) {
        return {this, it->second};
    }
    Node node;
    node.external = &tensor;
    node.requires_grad = true;
    tensor.grad();
    nodes_.push_back(std::move(node));
    grads_ready_ = false;
    param_ids_.emplace(&tensor, nodes_.size() - 1);
    return {this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
    const std::size_t self = nodes_.size();
    Node node;
    node.value = std::move(value);
    for (auto in : inputs) {
        if (in >= self) {
            throw std::logic_error("tape input does not precede its op");
        }
        node.requires_grad = node.requires_grad || nodes_[in].requires_grad;
    }
    node.inputs = std::move(inputs);
    if (node.requires_grad) {
        node.backward = std::move(backward);
    }
    nodes_.push_back(std::move(node));
    grads_ready_ = false;
    return {this, self};
}

const Tensor& Tape::value(std::size_t id) const {
    const auto& node = nodes_.at(id);
    return node.external ? *node.external : node.value;
}

std::span<double> Tape::grad(std::size_t id) {
    auto& node = nodes_.at(id);
    if (node.external) {
        return node.external->grad();
    }
    if (!grads_ready_) {
        throw std::logic_error("gradients are only available after backward()");
    }
    return node.grad;
}

std::span<const double> Tape::grad(std::size_t id) const {
    const auto& node = nodes_.at(id);
    if (node.external) {
        return std::as_const(*node.external).grad();
    }
    if (!grads_ready_) {
        throw std::logic_error("gradients are only available after backward()");
    }
    return node.grad;
}

void Tape::backward(Var loss) {
    if (loss.tape != this) {
        throw std::invalid_argument("loss belongs to a different tape");
    }
    if (value(loss.id).size() != 1) {
        throw DimensionError("backward() needs a scalar loss, got " +
                             shape_to_string(value(loss.id).shape()));
    }
    for (auto& node : nodes_) {
        if (!node.external) {
            node.grad.assign(node.value.size(), 0.0);
        }
    }
    grads_ready_ = true;
    grad(loss.id)[0] += 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        if (nodes_[i].backward) {
            nodes_[i].backward(*this, i);
        }
    }
}

namespace {

Tape& tape_of(Var a) {
    if (a.tape == nullptr) {
        throw std::invalid_argument("variable is not attached to a tape");
    }
    return *a.tape;
}

Tape& tape_of(Var a, Var b) {
    if (a.tape != b.tape) {
        throw std::invalid_argument("operands live on different tapes");
    }
    return tape_of(a);
}

// Runs fn(grad span) only when the input takes part in differentiation.
template <typename Fn>
void accumulate(Tape& tape, std::size_t id, Fn&& fn) {
    if (tape.requires_grad(id)) {
        fn(tape.grad(id));
    }
}

enum class BinaryOp { Add, Sub, Mul };

Var binary(Var a, Var b, BinaryOp op) {
    Tape& tape = tape_of(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    const bool a_scalar = av.size() == 1 && bv.size() != 1;
    const bool b_scalar = bv.size() == 1 && av.size() != 1;
    if (!a_scalar && !b_scalar && av.shape() != bv.shape()) {
        throw DimensionError(fmt::format("incompatible shapes {} and {}", shape_to_string(av.shape()),
                                         shape_to_string(bv.shape())));
    }
    const Shape out_shape = a_scalar ? bv.shape() : av.shape();
    const std::size_t n = shape_size(out_shape);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = av[a_scalar ? 0 : i];
        const double y = bv[b_scalar ? 0 : i];
        switch (op) {
        case BinaryOp::Add: out[i] = x + y; break;
        case BinaryOp::Sub: out[i] = x - y; break;
        case BinaryOp::Mul: out[i] = x * y; break;
        }
    }
    const std::size_t ia = a.id;
    const std::size_t ib = b.id;
    return tape.record(Tensor(out_shape, std::move(out)), {ia, ib},
                       [ia, ib, a_scalar, b_scalar, op, n](Tape& t, std::size_t self) {
                           auto g = t.grad(self);
                           const Tensor& x = t.value(ia);
                           const Tensor& y = t.value(ib);
                           accumulate(t, ia, [&](std::span<double> ga) {
                               for (std::size_t i = 0; i < n; ++i) {
                                   double d = g[i];
                                   if (op == BinaryOp::Mul) {
                                       d *= y[b_scalar ? 0 : i];
                                   }
                                   ga[a_scalar ? 0 : i] += d;
                               }
                           });
                           accumulate(t, ib, [&](std::span<double> gb) {
                               for (std::size_t i = 0; i < n; ++i) {
                                   double d = g[i];
                                   if (op == BinaryOp::Sub) {
                                       d = -d;
                                   } else if (op == BinaryOp::Mul) {
                                       d *= x[a_scalar ? 0 : i];
                                   }
                                   gb[b_scalar ? 0 : i] += d;
                               }
                           });
                       });
}

// Elementwise unary op whose derivative is expressed through its own output.
template <typename Forward, typename DerivFromOutput>
Var unary(Var x, Forward forward, DerivFromOutput deriv) {
    Tape& tape = tape_of(x);
    const Tensor& xv = x.value();
    std::vector<double> out(xv.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = forward(xv[i]);
    }
    const std::size_t ix = x.id;
    return tape.record(Tensor(xv.shape(), std::move(out)), {ix}, [ix, deriv](Tape& t, std::size_t self) {
        accumulate(t, ix, [&](std::span<double> gx) {
            auto g = t.grad(self);
            const Tensor& y = t.value(self);
            const Tensor& in = t.value(ix);
            for (std::size_t i = 0; i < gx.size(); ++i) {
                gx[i] += g[i] * deriv(in[i], y[i]);
            }
        });
    });
}

double stable_sigmoid(double v) {
    if (v >= 0) {
        return 1.0 / (1.0 + std::exp(-v));
    }
    const double e = std::exp(v);
    return e / (1.0 + e);
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
    if (t.rank() != rank) {
        throw DimensionError(fmt::format("{} needs a rank-{} tensor, got {}", op, rank, shape_to_string(t.shape())));
    }
}

}  // namespace

Var matmul(Var a, Var b) {
    Tape& tape = tape_of(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require_rank(av, 2, "matmul");
    const std::size_t m = av.shape()[0];
    const std::size_t k = av.shape()[1];
    const bool vector_rhs = bv.rank() == 1;
    if (bv.rank() > 2 || bv.shape()[0] != k) {
        throw DimensionError(fmt::format("matmul inner dimensions disagree: {} x {}", shape_to_string(av.shape()),
                                         shape_to_string(bv.shape())));
    }
    const std::size_t n = vector_rhs ? 1 : bv.shape()[1];
    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            if (aip == 0.0) {
                continue;
            }
            const double* brow = bv.values().data() + p * n;
            double* orow = out.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) {
                orow[j] += aip * brow[j];
            }
        }
    }
    Shape out_shape = vector_rhs ? Shape{m} : Shape{m, n};
    const std::size_t ia = a.id;
    const std::size_t ib = b.id;
    return tape.record(Tensor(std::move(out_shape), std::move(out)), {ia, ib},
                       [ia, ib, m, k, n](Tape& t, std::size_t self) {
                           auto g = t.grad(self);
                           const Tensor& x = t.value(ia);
                           const Tensor& y = t.value(ib);
                           accumulate(t, ia, [&](std::span<double> ga) {
                               for (std::size_t i = 0; i < m; ++i) {
                                   for (std::size_t p = 0; p < k; ++p) {
                                       double s = 0.0;
                                       for (std::size_t j = 0; j < n; ++j) {
                                           s += g[i * n + j] * y[p * n + j];
                                       }
                                       ga[i * k + p] += s;
                                   }
                               }
                           });
                           accumulate(t, ib, [&](std::span<double> gb) {
                               for (std::size_t i = 0; i < m; ++i) {
                                   for (std::size_t p = 0; p < k; ++p) {
                                       const double xip = x[i * k + p];
                                       for (std::size_t j = 0; j < n; ++j) {
                                           gb[p * n + j] += xip * g[i * n + j];
                                       }
                                   }
                               }
                           });
                       });
}

Var transpose(Var a) {
    Tape& tape = tape_of(a);
    const Tensor& av = a.value();
    require_rank(av, 2, "transpose");
    const std::size_t m = av.shape()[0];
    const std::size_t n = av.shape()[1];
    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out[j * m + i] = av[i * n + j];
        }
    }
    const std::size_t ia = a.id;
    return tape.record(Tensor({n, m}, std::move(out)), {ia}, [ia, m, n](Tape& t, std::size_t self) {
        accumulate(t, ia, [&](std::span<double> ga) {
            auto g = t.grad(self);
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    ga[i * n + j] += g[j * m + i];
                }
            }
        });
    });
}

Var add(Var a, Var b) { return binary(a, b, BinaryOp::Add); }
Var sub(Var a, Var b) { return binary(a, b, BinaryOp::Sub); }
Var mul(Var a, Var b) { return binary(a, b, BinaryOp::Mul); }

Var sigmoid(Var x) {
    return unary(x, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var x) {
    return unary(x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var x) {
    return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Var scale(Var x, double factor) {
    return unary(x, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Var add_scalar(Var x, double offset) {
    return unary(x, [offset](double v) { return v + offset; }, [](double, double) { return 1.0; });
}

Var one_minus(Var x) {
    return unary(x, [](double v) { return 1.0 - v; }, [](double, double) { return -1.0; });
}

Var add_bias(Var x, Var b) {
    Tape& tape = tape_of(x, b);
    const Tensor& xv = x.value();
    const Tensor& bv = b.value();
    if (xv.rank() == 1) {
        return add(x, b);
    }
    require_rank(xv, 2, "add_bias");
    require_rank(bv, 1, "add_bias");
    const std::size_t rows = xv.shape()[0];
    const std::size_t cols = xv.shape()[1];
    if (bv.size() != cols) {
        throw DimensionError(fmt::format("bias of length {} does not match {}", bv.size(), shape_to_string(xv.shape())));
    }
    std::vector<double> out(xv.values().begin(), xv.values().end());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out[r * cols + c] += bv[c];
        }
    }
    const std::size_t ix = x.id;
    const std::size_t ib = b.id;
    return tape.record(Tensor(xv.shape(), std::move(out)), {ix, ib}, [ix, ib, rows, cols](Tape& t, std::size_t self) {
        auto g = t.grad(self);
        accumulate(t, ix, [&](std::span<double> gx) {
            for (std::size_t i = 0; i < gx.size(); ++i) {
                gx[i] += g[i];
            }
        });
        accumulate(t, ib, [&](std::span<double> gb) {
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < cols; ++c) {
                    gb[c] += g[r * cols + c];
                }
            }
        });
    });
}

Var softmax(Var x, std::size_t axis) {
    Tape& tape = tape_of(x);
    const Tensor& xv = x.value();
    if (axis >= xv.rank()) {
        throw DimensionError(fmt::format("softmax axis {} out of range for {}", axis, shape_to_string(xv.shape())));
    }
    const Shape& shape = xv.shape();
    std::size_t outer = 1;
    std::size_t inner = 1;
    for (std::size_t d = 0; d < axis; ++d) {
        outer *= shape[d];
    }
    for (std::size_t d = axis + 1; d < shape.size(); ++d) {
        inner *= shape[d];
    }
    const std::size_t n = shape[axis];
    std::vector<double> out(xv.size());
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * n * inner + in;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                mx = std::max(mx, xv[base + i * inner]);
            }
            double z = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double e = std::exp(xv[base + i * inner] - mx);
                out[base + i * inner] = e;
                z += e;
            }
            for (std::size_t i = 0; i < n; ++i) {
                out[base + i * inner] /= z;
            }
        }
    }
    const std::size_t ix = x.id;
    return tape.record(Tensor(shape, std::move(out)), {ix}, [ix, outer, inner, n](Tape& t, std::size_t self) {
        accumulate(t, ix, [&](std::span<double> gx) {
            auto g = t.grad(self);
            const Tensor& y = t.value(self);
            for (std::size_t o = 0; o < outer; ++o) {
                for (std::size_t in = 0; in < inner; ++in) {
                    const std::size_t base = o * n * inner + in;
                    double dot = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        dot += y[base + i * inner] * g[base + i * inner];
                    }
                    for (std::size_t i = 0; i < n; ++i) {
                        const std::size_t at = base + i * inner;
                        gx[at] += y[at] * (g[at] - dot);
                    }
                }
            }
        });
    });
}

SegmentMax segment_max(Var scores, const std::vector<std::vector<std::size_t>>& segments) {
    Tape& tape = tape_of(scores);
    const Tensor& sv = scores.value();
    require_rank(sv, 1, "segment_max");
    if (segments.empty()) {
        throw DimensionError("segment_max needs at least one segment");
    }
    std::vector<double> out(segments.size());
    std::vector<std::size_t> argmax(segments.size());
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const auto& seg = segments[s];
        if (seg.empty()) {
            throw DimensionError(fmt::format("segment {} is empty", s));
        }
        std::size_t best = seg.front();
        for (auto pos : seg) {
            if (pos >= sv.size()) {
                throw std::out_of_range(fmt::format("segment position {} out of range for {} scores", pos, sv.size()));
            }
            if (sv[pos] > sv[best] || (sv[pos] == sv[best] && pos < best)) {
                best = pos;
            }
        }
        out[s] = sv[best];
        argmax[s] = best;
    }
    const std::size_t ix = scores.id;
    Var values = tape.record(Tensor::vector(std::move(out)), {ix}, [ix, argmax](Tape& t, std::size_t self) {
        accumulate(t, ix, [&](std::span<double> gx) {
            auto g = t.grad(self);
            for (std::size_t s = 0; s < argmax.size(); ++s) {
                gx[argmax[s]] += g[s];
            }
        });
    });
    return {values, std::move(argmax)};
}

Var lookup(Var table, std::span<const std::size_t> ids) {
    Tape& tape = tape_of(table);
    const Tensor& tv = table.value();
    require_rank(tv, 2, "lookup");
    if (ids.empty()) {
        throw DimensionError("lookup needs at least one id");
    }
    const std::size_t vocab = tv.shape()[0];
    const std::size_t dim = tv.shape()[1];
    std::vector<double> out(ids.size() * dim);
    for (std::size_t r = 0; r < ids.size(); ++r) {
        if (ids[r] >= vocab) {
            throw std::out_of_range(fmt::format("lookup id {} out of range for table of {} rows", ids[r], vocab));
        }
        std::copy_n(tv.values().begin() + static_cast<std::ptrdiff_t>(ids[r] * dim), dim,
                    out.begin() + static_cast<std::ptrdiff_t>(r * dim));
    }
    const std::size_t it = table.id;
    std::vector<std::size_t> rows(ids.begin(), ids.end());
    return tape.record(Tensor({ids.size(), dim}, std::move(out)), {it}, [it, rows, dim](Tape& t, std::size_t self) {
        accumulate(t, it, [&](std::span<double> gt) {
            auto g = t.grad(self);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                for (std::size_t c = 0; c < dim; ++c) {
                    gt[rows[r] * dim + c] += g[r * dim + c];
                }
            }
        });
    });
}

Var cross_entropy(Var dist, std::size_t gold) {
    Tape& tape = tape_of(dist);
    const Tensor& dv = dist.value();
    require_rank(dv, 1, "cross_entropy");
    if (gold >= dv.size()) {
        throw std::out_of_range(fmt::format("gold index {} out of range for {} classes", gold, dv.size()));
    }
    const double p = std::max(dv[gold], kProbabilityFloor);
    const std::size_t ix = dist.id;
    return tape.record(Tensor::scalar(-std::log(p)), {ix}, [ix, gold](Tape& t, std::size_t self) {
        accumulate(t, ix, [&](std::span<double> gx) {
            const double q = t.value(ix)[gold];
            if (q > kProbabilityFloor) {
                gx[gold] += -t.grad(self)[0] / q;
            }
        });
    });
}

Var concat(std::initializer_list<Var> parts, std::size_t axis) {
    return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}

Var concat(std::span<const Var> parts, std::size_t axis) {
    if (parts.empty()) {
        throw DimensionError("concat needs at least one part");
    }
    Tape& tape = tape_of(parts.front());
    const std::size_t rank = parts.front().value().rank();
    if (rank > 2 || axis >= rank) {
        throw DimensionError(fmt::format("concat supports rank 1 or 2 with a valid axis, got rank {} axis {}", rank, axis));
    }
    std::vector<std::size_t> ids;
    for (const auto& p : parts) {
        tape_of(parts.front(), p);
        if (p.value().rank() != rank) {
            throw DimensionError("concat parts differ in rank");
        }
        ids.push_back(p.id);
    }
    if (rank == 1 || axis == 0) {
        // Row-major layout makes axis-0 concatenation a flat append.
        std::vector<double> out;
        std::size_t rows = 0;
        const std::size_t cols = rank == 2 ? parts.front().value().shape()[1] : 0;
        for (const auto& p : parts) {
            const Tensor& v = p.value();
            if (rank == 2 && v.shape()[1] != cols) {
                throw DimensionError("concat along rows needs equal column counts");
            }
            rows += v.shape()[0];
            out.insert(out.end(), v.values().begin(), v.values().end());
        }
        Shape shape = rank == 1 ? Shape{rows} : Shape{rows, cols};
        return tape.record(Tensor(std::move(shape), std::move(out)), ids, [ids](Tape& t, std::size_t self) {
            auto g = t.grad(self);
            std::size_t offset = 0;
            for (auto id : ids) {
                const std::size_t n = t.value(id).size();
                accumulate(t, id, [&](std::span<double> gi) {
                    for (std::size_t i = 0; i < n; ++i) {
                        gi[i] += g[offset + i];
                    }
                });
                offset += n;
            }
        });
    }
    const std::size_t rows = parts.front().value().shape()[0];
    std::vector<std::size_t> widths;
    std::size_t total = 0;
    for (const auto& p : parts) {
        if (p.value().shape()[0] != rows) {
            throw DimensionError("concat along columns needs equal row counts");
        }
        widths.push_back(p.value().shape()[1]);
        total += widths.back();
    }
    std::vector<double> out(rows * total);
    std::size_t col0 = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const Tensor& v = parts[k].value();
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < widths[k]; ++c) {
                out[r * total + col0 + c] = v[r * widths[k] + c];
            }
        }
        col0 += widths[k];
    }
    return tape.record(Tensor({rows, total}, std::move(out)), ids,
                       [ids, widths, rows, total](Tape& t, std::size_t self) {
                           auto g = t.grad(self);
                           std::size_t c0 = 0;
                           for (std::size_t k = 0; k < ids.size(); ++k) {
                               accumulate(t, ids[k], [&](std::span<double> gi) {
                                   for (std::size_t r = 0; r < rows; ++r) {
                                       for (std::size_t c = 0; c < widths[k]; ++c) {
                                           gi[r * widths[k] + c] += g[r * total + c0 + c];
                                       }
                                   }
                               });
                               c0 += widths[k];
                           }
                       });
}

Var slice(Var x, std::size_t begin, std::size_t end) {
    Tape& tape = tape_of(x);
    const Tensor& xv = x.value();
    require_rank(xv, 1, "slice");
    if (begin >= end || end > xv.size()) {
        throw DimensionError(fmt::format("slice [{}, {}) invalid for length {}", begin, end, xv.size()));
    }
    std::vector<double> out(xv.values().begin() + static_cast<std::ptrdiff_t>(begin),
                            xv.values().begin() + static_cast<std::ptrdiff_t>(end));
    const std::size_t ix = x.id;
    return tape.record(Tensor::vector(std::move(out)), {ix}, [ix, begin, end](Tape& t, std::size_t self) {
        accumulate(t, ix, [&](std::span<double> gx) {
            auto g = t.grad(self);
            for (std::size_t i = begin; i < end; ++i) {
                gx[i] += g[i - begin];
            }
        });
    });
}

Var row(Var x, std::size_t index) {
    Tape& tape = tape_of(x);
    const Tensor& xv = x.value();
    require_rank(xv, 2, "row");
    const std::size_t rows = xv.shape()[0];
    const std::size_t cols = xv.shape()[1];
    if (index >= rows) {
        throw std::out_of_range(fmt::format("row {} out of range for {} rows", index, rows));
    }
    std::vector<double> out(xv.values().begin() + static_cast<std::ptrdiff_t>(index * cols),
                            xv.values().begin() + static_cast<std::ptrdiff_t>((index + 1) * cols));
    const std::size_t ix = x.id;
    return tape.record(Tensor::vector(std::move(out)), {ix}, [ix, index, cols](Tape& t, std::size_t self) {
        accumulate(t, ix, [&](std::span<double> gx) {
            auto g = t.grad(self);
            for (std::size_t c = 0; c < cols; ++c) {
                gx[index * cols + c] += g[c];
            }
        });
    });
}

Var stack_rows(std::span<const Var> rows) {
    if (rows.empty()) {
        throw DimensionError("stack_rows needs at least one row");
    }
    for (const auto& r : rows) {
        require_rank(r.value(), 1, "stack_rows");
    }
    Var stacked = concat(rows, 0);
    // Flat append already has the right layout; only the shape changes.
    Tape& tape = *stacked.tape;
    const std::size_t n = rows.size();
    const std::size_t m = rows.front().size();
    if (stacked.size() != n * m) {
        throw DimensionError("stack_rows needs rows of equal length");
    }
    std::vector<double> values(stacked.value().values().begin(), stacked.value().values().end());
    const std::size_t is = stacked.id;
    return tape.record(Tensor({n, m}, std::move(values)), {is}, [is](Tape& t, std::size_t self) {
        accumulate(t, is, [&](std::span<double> gs) {
            auto g = t.grad(self);
            for (std::size_t i = 0; i < gs.size(); ++i) {
                gs[i] += g[i];
            }
        });
    });
}

Var gather(Var x, std::span<const std::size_t> index) {
    Tape& tape = tape_of(x);
    const Tensor& xv = x.value();
    require_rank(xv, 1, "gather");
    if (index.empty()) {
        throw DimensionError("gather needs at least one index");
    }
    std::vector<double> out(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= xv.size()) {
            throw std::out_of_range(fmt::format("gather index {} out of range for length {}", index[i], xv.size()));
        }
        out[i] = xv[index[i]];
    }
    const std::size_t ix = x.id;
    std::vector<std::size_t> idx(index.begin(), index.end());
    return tape.record(Tensor::vector(std::move(out)), {ix}, [ix, idx](Tape& t, std::size_t self) {
        accumulate(t, ix, [&](std::span<double> gx) {
            auto g = t.grad(self);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                gx[idx[i]] += g[i];
            }
        });
    });
}

Var scatter_sum(Var x, std::span<const std::size_t> targets, std::size_t out_size) {
    Tape& tape = tape_of(x);
    const Tensor& xv = x.value();
    require_rank(xv, 1, "scatter_sum");
    if (targets.size() != xv.size()) {
        throw DimensionError(fmt::format("scatter_sum has {} targets for {} values", targets.size(), xv.size()));
    }
    std::vector<double> out(out_size, 0.0);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] >= out_size) {
            throw std::out_of_range(fmt::format("scatter target {} out of range for size {}", targets[i], out_size));
        }
        out[targets[i]] += xv[i];
    }
    const std::size_t ix = x.id;
    std::vector<std::size_t> tg(targets.begin(), targets.end());
    return tape.record(Tensor::vector(std::move(out)), {ix}, [ix, tg](Tape& t, std::size_t self) {
        accumulate(t, ix, [&](std::span<double> gx) {
            auto g = t.grad(self);
            for (std::size_t i = 0; i < tg.size(); ++i) {
                gx[i] += g[tg[i]];
            }
        });
    });
}

Var sum(Var x) {
    Tape& tape = tape_of(x);
    const Tensor& xv = x.value();
    double s = 0.0;
    for (double v : xv.values()) {
        s += v;
    }
    const std::size_t ix = x.id;
    return tape.record(Tensor::scalar(s), {ix}, [ix](Tape& t, std::size_t self) {
        accumulate(t, ix, [&](std::span<double> gx) {
            const double g = t.grad(self)[0];
            for (auto& v : gx) {
                v += g;
            }
        });
    });
}

Var mean_rows(Var x, std::size_t begin, std::size_t end) {
    Tape& tape = tape_of(x);
    const Tensor& xv = x.value();
    require_rank(xv, 2, "mean_rows");
    const std::size_t rows = xv.shape()[0];
    const std::size_t cols = xv.shape()[1];
    if (begin >= end || end > rows) {
        throw DimensionError(fmt::format("mean_rows [{}, {}) invalid for {} rows", begin, end, rows));
    }
    const double inv = 1.0 / static_cast<double>(end - begin);
    std::vector<double> out(cols, 0.0);
    for (std::size_t r = begin; r < end; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            out[c] += xv[r * cols + c];
        }
    }
    for (auto& v : out) {
        v *= inv;
    }
    const std::size_t ix = x.id;
    return tape.record(Tensor::vector(std::move(out)), {ix}, [ix, begin, end, cols, inv](Tape& t, std::size_t self) {
        accumulate(t, ix, [&](std::span<double> gx) {
            auto g = t.grad(self);
            for (std::size_t r = begin; r < end; ++r) {
                for (std::size_t c = 0; c < cols; ++c) {
                    gx[r * cols + c] += g[c] * inv;
                }
            }
        });
    });
}

}  // namespace iwaqg::ad
