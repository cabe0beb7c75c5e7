// SPDX-License-Identifier: Apache-2.0
//
// Question generator: a bidirectional LSTM over [word; meta-tag] embeddings
// with gated self-attention and a fusion gate, decoded by an attention LSTM
// whose output distribution mixes vocabulary generation with a maxout copy
// pointer over the source positions.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "iwaqg/autodiff.hpp"
#include "iwaqg/classifier.hpp"
#include "iwaqg/dataset.hpp"
#include "iwaqg/labels.hpp"
#include "iwaqg/nn.hpp"
#include "iwaqg/sequences.hpp"
#include "iwaqg/vocabulary.hpp"

namespace iwaqg {

struct QGConfig {
    std::size_t word_dim = 32;
    std::size_t meta_dim = 8;
    std::size_t encoder_hidden = 32;  // per direction
    std::size_t decoder_hidden = 64;
    std::size_t epochs = 40;
    std::size_t batch_size = 2;
    double lr = 1e-2;
    double weight_decay = 0.0;
    double max_grad_norm = 5.0;
    std::size_t max_len = 30;
    std::size_t vocab_max_size = 20000;
    // Training stops once the epoch's mean per-token loss is below this.
    // Zero disables early stopping.
    double target_loss = 0.0;
    // Off trains the no-insertion baseline: every input is built as Others.
    bool insert_interrogative = true;
    std::uint64_t seed = 1;

    void validate() const;
    std::size_t state_width() const { return 2 * encoder_hidden; }
};

nlohmann::json to_json(const QGConfig& config);
QGConfig qg_config_from_json(const nlohmann::json& j);

class QGModel {
public:
    QGModel(QGConfig config, Vocabulary vocab);
    static QGModel initialize(const QGConfig& config, const Vocabulary& vocab);

    const QGConfig& config() const { return config_; }
    const Vocabulary& vocab() const { return vocab_; }
    nn::ParamSet& params() { return params_; }
    const nn::ParamSet& params() const { return params_; }

private:
    void register_params();

    QGConfig config_;
    Vocabulary vocab_;
    nn::ParamSet params_;
};

// Source positions grouped by extended id, in order of first appearance.
struct CopySegments {
    std::vector<std::vector<std::size_t>> positions;
    std::vector<std::size_t> word;             // extended id of each segment
    std::vector<std::size_t> segment_of;       // per source position
};
CopySegments copy_segments(const TaggedSequence& source);

struct EncodedPassage {
    ad::Var states;         // [n x 2H], fusion-gate outputs
    ad::Var self_attention; // [n x n], row t is the alignment of position t
    ad::Var final_state;    // [decoder_hidden]
    const TaggedSequence* source = nullptr;
    CopySegments segments;
};

EncodedPassage encode(ad::Tape& tape, QGModel& model, const TaggedSequence& source);

struct DecodeStep {
    ad::Var h;
    ad::Var c;
    ad::Var raw_attention;    // [n]
    ad::Var attention;        // [n], softmax of raw_attention
    ad::Var context;          // [2H]
    ad::Var generate_scores;  // [V]
    ad::Var copy_scores;      // [segments], maxout score per source word
    ad::Var position_scores;  // [n], each position's score capped at its word's max
    ad::Var final_dist;       // [V + number of source OOV words]
};

// prev_token is an extended id; ids outside the vocabulary feed [UNK].
DecodeStep decode_step(ad::Tape& tape, QGModel& model, const EncodedPassage& encoded, std::size_t prev_token,
                       ad::Var h, ad::Var c);

// Zero cell state matching the decoder width.
ad::Var initial_cell(ad::Tape& tape, const QGModel& model);

// Decoder targets: question tokens as extended ids followed by [EOS].
std::vector<std::size_t> target_ids(const TaggedSequence& source, std::span<const std::string> question,
                                    const Vocabulary& vocab);

// Teacher-forced mean cross-entropy per target token.
ad::Var sequence_loss(ad::Tape& tape, QGModel& model, const TaggedSequence& source,
                      std::span<const std::size_t> targets);

struct QGEpochLog {
    std::size_t epoch = 0;  // 0 is the untrained model
    double token_loss = 0.0;
};

struct QGTrainResult {
    QGModel model;
    std::vector<QGEpochLog> log;
};

// Builds every input with the gold interrogative class (or none, for the
// baseline).
QGTrainResult train_qg(std::span<const Example> dataset, const QGConfig& config, const Vocabulary& vocab);

// Vocabulary over passages and questions.
Vocabulary build_qg_vocab(std::span<const Example> dataset, std::size_t max_size);

struct Generation {
    std::vector<std::string> tokens;
    std::vector<std::size_t> ids;
    // One row per emitted token (including [EOS] when reached), n_in columns.
    std::vector<std::vector<double>> attention;
    TaggedSequence source;
};

Generation generate(const Example& example, IWClass predicted, QGModel& model,
                    std::optional<std::size_t> max_len = std::nullopt);

using IWPredictor = std::function<IWClass(const Example&)>;

struct PipelineOutput {
    IWClass predicted = IWClass::Others;
    Generation generation;
};

PipelineOutput pipeline_generate(const Example& example, const IWPredictor& predictor, QGModel& model);
PipelineOutput pipeline_generate(const Example& example, ClassifierModel& classifier, QGModel& model);

}  // namespace iwaqg
