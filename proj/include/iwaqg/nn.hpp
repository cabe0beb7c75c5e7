// SPDX-License-Identifier: Apache-2.0
//
// Named parameter collections, the recurrent cell shared by both models, and
// the Adam optimiser.

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "iwaqg/autodiff.hpp"
#include "iwaqg/rng.hpp"
#include "iwaqg/tensor.hpp"

namespace iwaqg::nn {

// Tensors keyed by name, kept in registration order so initialisation and
// serialisation are deterministic.
class ParamSet {
public:
    Tensor& add(const std::string& name, Shape shape, std::size_t fan_in);
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.contains(name); }

    // Uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] in registration order.
    void init_uniform(Rng& rng);
    void zero_grad();
    bool all_finite() const;
    std::size_t parameter_count() const;

    std::size_t size() const { return entries_.size(); }
    const std::string& name(std::size_t i) const { return entries_[i].name; }
    Tensor& tensor(std::size_t i) { return entries_[i].tensor; }
    const Tensor& tensor(std::size_t i) const { return entries_[i].tensor; }

private:
    struct Entry {
        std::string name;
        Tensor tensor;
        std::size_t fan_in;
    };
    std::vector<Entry> entries_;
    std::map<std::string, std::size_t> index_;
};

// LSTM cell: z = W [x; h] + b, gates (input, forget, candidate, output).
struct LstmCell {
    std::string prefix;
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;

    void register_params(ParamSet& params) const;
    std::pair<ad::Var, ad::Var> step(ad::Tape& tape, ParamSet& params, ad::Var x, ad::Var h, ad::Var c) const;
};

// Runs the cell over inputs (each [input_size]) and returns hidden states in
// input order; reverse=true walks right to left.
std::vector<ad::Var> run_lstm(ad::Tape& tape, ParamSet& params, const LstmCell& cell, const std::vector<ad::Var>& inputs,
                              bool reverse);

// Splits the rows of a [n x d] tensor into n vectors.
std::vector<ad::Var> unstack_rows(ad::Var x);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::size_t step = 0;
};

// One Adam update with decoupled weight decay.
void adam_step(Tensor& param, std::span<const double> grad, AdamState& state, const AdamConfig& config);

class Adam {
public:
    explicit Adam(AdamConfig config) : config_(config) {}
    // Uses each tensor's gradient slot; tensors without one are skipped.
    void step(ParamSet& params);
    const AdamConfig& config() const { return config_; }

private:
    AdamConfig config_;
    std::map<std::string, AdamState> state_;
};

// Rescales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping. max_norm <= 0 disables clipping.
double clip_grad_norm(ParamSet& params, double max_norm);

// Multiplies every gradient by factor.
void scale_grads(ParamSet& params, double factor);

}  // namespace iwaqg::nn
