// SPDX-License-Identifier: Apache-2.0
//
// Interrogative-word classifier: a two-layer bidirectional LSTM stands in for
// the pretrained transformer and yields a summary vector (the [CLS] role);
// a single feed-forward layer maps [summary (; entity embedding)] to 8 logits.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "iwaqg/autodiff.hpp"
#include "iwaqg/dataset.hpp"
#include "iwaqg/labels.hpp"
#include "iwaqg/nn.hpp"
#include "iwaqg/rng.hpp"
#include "iwaqg/sequences.hpp"
#include "iwaqg/vocabulary.hpp"

namespace iwaqg {

struct ClassifierConfig {
    bool use_answer_tagging = true;    // AT
    bool use_answer_embedding = false; // AE
    bool use_entity_type = true;       // NER
    std::size_t embed_dim = 32;
    std::size_t encoder_hidden = 32;
    std::size_t encoder_layers = 2;
    std::size_t entity_embed_dim = 5;
    std::size_t num_classes = kNumIWClasses;
    std::size_t epochs = 3;
    std::size_t batch_size = 8;
    double lr = 1e-3;
    double weight_decay = 0.01;
    double max_grad_norm = 5.0;
    // Held-out share of the training data used for best-epoch selection.
    double dev_fraction = 0.1;
    std::size_t vocab_max_size = 20000;
    std::uint64_t seed = 1;

    // Throws std::invalid_argument on inconsistent settings.
    void validate() const;
    std::size_t summary_width() const;
    std::size_t feature_width() const;
    // Table 6 row label, e.g. "CLS + AT + NER".
    std::string ablation_label() const;
};

nlohmann::json to_json(const ClassifierConfig& config);
ClassifierConfig classifier_config_from_json(const nlohmann::json& j);

class ClassifierModel {
public:
    ClassifierModel(ClassifierConfig config, Vocabulary vocab);

    // Registers every tensor and initialises them from config.seed.
    static ClassifierModel initialize(const ClassifierConfig& config, const Vocabulary& vocab);

    const ClassifierConfig& config() const { return config_; }
    const Vocabulary& vocab() const { return vocab_; }
    nn::ParamSet& params() { return params_; }
    const nn::ParamSet& params() const { return params_; }

private:
    void register_params();

    ClassifierConfig config_;
    Vocabulary vocab_;
    nn::ParamSet params_;
};

// Summary vector: last forward state and first backward state of the top
// layer, followed by the mean top-layer state over the answer when AE is on.
ad::Var encode_summary(ad::Tape& tape, ClassifierModel& model, const ClassifierInput& input);
ad::Var classifier_logits(ad::Tape& tape, ClassifierModel& model, const Example& example);
std::array<double, kNumIWClasses> classify(ClassifierModel& model, const Example& example);
IWClass predict_class(ClassifierModel& model, const Example& example);

struct ClassifierEpochLog {
    std::size_t epoch = 0;  // 0 is the untrained model
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double dev_accuracy = 0.0;
};

struct ClassifierTrainResult {
    ClassifierModel model;
    std::vector<ClassifierEpochLog> log;
    std::size_t best_epoch = 0;
};

// Adam with weight decay on mean cross-entropy; returns the parameters of the
// epoch with the best dev accuracy (earliest on ties).
ClassifierTrainResult train_classifier(std::span<const Example> dataset, const ClassifierConfig& config,
                                       const Vocabulary& vocab);

struct ClassMetrics {
    std::size_t support = 0;    // gold count
    std::size_t predicted = 0;  // predicted count
    std::size_t correct = 0;
    // Absent when the denominator is zero.
    std::optional<double> recall;
    std::optional<double> precision;
};

struct ClassificationReport {
    std::array<ClassMetrics, kNumIWClasses> per_class{};
    double accuracy = 0.0;
    std::size_t size = 0;
};

ClassificationReport score_predictions(std::span<const IWClass> gold, std::span<const IWClass> predicted);
ClassificationReport eval_classifier(std::span<const Example> dataset, ClassifierModel& model);
nlohmann::json to_json(const ClassificationReport& report);

// Row-stochastic 8x8 matrix; row g gives the distribution of a wrong draw
// for gold class g (the diagonal is ignored).
using ConfusionMatrix = std::array<std::array<double, kNumIWClasses>, kNumIWClasses>;

// Returns gold with probability `accuracy`, otherwise another class: uniform
// over the remaining seven, or drawn from the off-diagonal of the confusion
// row when one is given.
IWClass oracle_classifier(IWClass gold, double accuracy, Rng& rng, const ConfusionMatrix* confusion = nullptr);

}  // namespace iwaqg
