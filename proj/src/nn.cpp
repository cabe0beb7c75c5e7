// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/nn.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace iwaqg::nn {

Tensor& ParamSet::add(const std::string& name, Shape shape, std::size_t fan_in) {
    if (index_.contains(name)) {
        throw std::invalid_argument("duplicate parameter name: " + name);
    }
    index_.emplace(name, entries_.size());
    entries_.push_back({name, Tensor(std::move(shape)), fan_in == 0 ? 1 : fan_in});
    return entries_.back().tensor;
}

Tensor& ParamSet::get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw std::out_of_range("unknown parameter: " + name);
    }
    return entries_[it->second].tensor;
}

const Tensor& ParamSet::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
        throw std::out_of_range("unknown parameter: " + name);
    }
    return entries_[it->second].tensor;
}

void ParamSet::init_uniform(Rng& rng) {
    for (auto& e : entries_) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(e.fan_in));
        for (auto& v : e.tensor.values()) {
            v = rng.uniform(-bound, bound);
        }
    }
}

void ParamSet::zero_grad() {
    for (auto& e : entries_) {
        e.tensor.zero_grad();
    }
}

bool ParamSet::all_finite() const {
    for (const auto& e : entries_) {
        if (!e.tensor.all_finite()) {
            return false;
        }
    }
    return true;
}

std::size_t ParamSet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) {
        n += e.tensor.size();
    }
    return n;
}

void LstmCell::register_params(ParamSet& params) const {
    params.add(prefix + ".W", {4 * hidden_size, input_size + hidden_size}, input_size + hidden_size);
    params.add(prefix + ".b", {4 * hidden_size}, input_size + hidden_size);
}

std::pair<ad::Var, ad::Var> LstmCell::step(ad::Tape& tape, ParamSet& params, ad::Var x, ad::Var h, ad::Var c) const {
    const ad::Var W = tape.param(params.get(prefix + ".W"));
    const ad::Var b = tape.param(params.get(prefix + ".b"));
    const ad::Var z = ad::add(ad::matmul(W, ad::concat({x, h})), b);
    const std::size_t H = hidden_size;
    const ad::Var i = ad::sigmoid(ad::slice(z, 0, H));
    const ad::Var f = ad::sigmoid(ad::slice(z, H, 2 * H));
    const ad::Var g = ad::tanh(ad::slice(z, 2 * H, 3 * H));
    const ad::Var o = ad::sigmoid(ad::slice(z, 3 * H, 4 * H));
    const ad::Var c_next = ad::add(ad::mul(f, c), ad::mul(i, g));
    const ad::Var h_next = ad::mul(o, ad::tanh(c_next));
    return {h_next, c_next};
}

std::vector<ad::Var> run_lstm(ad::Tape& tape, ParamSet& params, const LstmCell& cell, const std::vector<ad::Var>& inputs,
                              bool reverse) {
    std::vector<ad::Var> out(inputs.size());
    ad::Var h = tape.constant(Tensor({cell.hidden_size}));
    ad::Var c = tape.constant(Tensor({cell.hidden_size}));
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const std::size_t t = reverse ? inputs.size() - 1 - k : k;
        std::tie(h, c) = cell.step(tape, params, inputs[t], h, c);
        out[t] = h;
    }
    return out;
}

std::vector<ad::Var> unstack_rows(ad::Var x) {
    std::vector<ad::Var> rows;
    const std::size_t n = x.value().shape()[0];
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back(ad::row(x, i));
    }
    return rows;
}

void adam_step(Tensor& param, std::span<const double> grad, AdamState& state, const AdamConfig& config) {
    const std::size_t n = param.size();
    if (grad.size() != n) {
        throw DimensionError(fmt::format("adam_step: gradient has {} values for a parameter of {}", grad.size(), n));
    }
    if (state.m.empty() && state.v.empty()) {
        state.m.assign(n, 0.0);
        state.v.assign(n, 0.0);
    }
    if (state.m.size() != n || state.v.size() != n) {
        throw DimensionError("adam_step: optimiser state does not match the parameter shape");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bias1 = 1.0 - std::pow(config.beta1, t);
    const double bias2 = 1.0 - std::pow(config.beta2, t);
    auto values = param.values();
    for (std::size_t i = 0; i < n; ++i) {
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grad[i];
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
        const double m_hat = state.m[i] / bias1;
        const double v_hat = state.v[i] / bias2;
        values[i] -= config.lr * (m_hat / (std::sqrt(v_hat) + config.eps) + config.weight_decay * values[i]);
    }
}

void Adam::step(ParamSet& params) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& t = params.tensor(i);
        if (!t.has_grad()) {
            continue;
        }
        adam_step(t, std::as_const(t).grad(), state_[params.name(i)], config_);
    }
}

double clip_grad_norm(ParamSet& params, double max_norm) {
    double sq = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& t = params.tensor(i);
        if (!t.has_grad()) {
            continue;
        }
        for (double g : t.grad()) {
            sq += g * g;
        }
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        scale_grads(params, max_norm / norm);
    }
    return norm;
}

void scale_grads(ParamSet& params, double factor) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& t = params.tensor(i);
        if (!t.has_grad()) {
            continue;
        }
        for (double& g : t.grad()) {
            g *= factor;
        }
    }
}

}  // namespace iwaqg::nn
