// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/qg_model.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace iwaqg {

void QGConfig::validate() const {
    if (word_dim == 0 || meta_dim == 0 || encoder_hidden == 0 || decoder_hidden == 0) {
        throw std::invalid_argument("qg dimensions must be positive");
    }
    if (batch_size == 0 || max_len == 0) {
        throw std::invalid_argument("qg batch_size and max_len must be positive");
    }
    if (!(lr > 0.0) || weight_decay < 0.0 || target_loss < 0.0) {
        throw std::invalid_argument("qg lr must be positive; weight_decay and target_loss non-negative");
    }
    if (vocab_max_size <= Vocabulary::kNumReserved) {
        throw std::invalid_argument("qg vocab_max_size must exceed the reserved block");
    }
}

nlohmann::json to_json(const QGConfig& c) {
    return {{"word_dim", c.word_dim},         {"meta_dim", c.meta_dim},
            {"encoder_hidden", c.encoder_hidden}, {"decoder_hidden", c.decoder_hidden},
            {"epochs", c.epochs},             {"batch_size", c.batch_size},
            {"lr", c.lr},                     {"weight_decay", c.weight_decay},
            {"max_grad_norm", c.max_grad_norm}, {"max_len", c.max_len},
            {"vocab_max_size", c.vocab_max_size}, {"target_loss", c.target_loss},
            {"insert_interrogative", c.insert_interrogative}, {"seed", c.seed}};
}

QGConfig qg_config_from_json(const nlohmann::json& j) {
    QGConfig c;
    c.word_dim = j.at("word_dim").get<std::size_t>();
    c.meta_dim = j.at("meta_dim").get<std::size_t>();
    c.encoder_hidden = j.at("encoder_hidden").get<std::size_t>();
    c.decoder_hidden = j.at("decoder_hidden").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.lr = j.at("lr").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.max_grad_norm = j.at("max_grad_norm").get<double>();
    c.max_len = j.at("max_len").get<std::size_t>();
    c.vocab_max_size = j.at("vocab_max_size").get<std::size_t>();
    c.target_loss = j.at("target_loss").get<double>();
    c.insert_interrogative = j.at("insert_interrogative").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

namespace {

nn::LstmCell encoder_cell(const QGConfig& c, bool backward) {
    return {backward ? "encoder.bwd" : "encoder.fwd", c.word_dim + c.meta_dim, c.encoder_hidden};
}

nn::LstmCell decoder_cell(const QGConfig& c) { return {"decoder", c.word_dim, c.decoder_hidden}; }

}  // namespace

QGModel::QGModel(QGConfig config, Vocabulary vocab) : config_(std::move(config)), vocab_(std::move(vocab)) {
    config_.validate();
    register_params();
}

QGModel QGModel::initialize(const QGConfig& config, const Vocabulary& vocab) {
    QGModel model(config, vocab);
    Rng rng(config.seed);
    model.params_.init_uniform(rng);
    return model;
}

void QGModel::register_params() {
    const std::size_t h2 = config_.state_width();
    const std::size_t d = config_.decoder_hidden;
    const std::size_t v = vocab_.size();
    params_.add("word_embedding", {v, config_.word_dim}, 1);
    params_.add("meta_embedding", {kNumMetaTags, config_.meta_dim}, 1);
    encoder_cell(config_, false).register_params(params_);
    encoder_cell(config_, true).register_params(params_);
    params_.add("self_attention.W", {h2, h2}, h2);
    params_.add("fusion.W", {h2, 2 * h2}, 2 * h2);
    params_.add("fusion.b", {h2}, 2 * h2);
    params_.add("gate.W", {h2, 2 * h2}, 2 * h2);
    params_.add("gate.b", {h2}, 2 * h2);
    params_.add("bridge.W", {d, h2}, h2);
    params_.add("bridge.b", {d}, h2);
    decoder_cell(config_).register_params(params_);
    params_.add("attention.W", {d, h2}, h2);
    params_.add("output.W", {v, d + h2}, d + h2);
    params_.add("output.b", {v}, d + h2);
}

CopySegments copy_segments(const TaggedSequence& source) {
    CopySegments seg;
    std::map<std::size_t, std::size_t> index;
    seg.segment_of.reserve(source.size());
    for (std::size_t j = 0; j < source.size(); ++j) {
        const std::size_t id = source.ids[j];
        auto [it, inserted] = index.try_emplace(id, seg.positions.size());
        if (inserted) {
            seg.positions.emplace_back();
            seg.word.push_back(id);
        }
        seg.positions[it->second].push_back(j);
        seg.segment_of.push_back(it->second);
    }
    return seg;
}

EncodedPassage encode(ad::Tape& tape, QGModel& model, const TaggedSequence& source) {
    if (source.size() == 0) {
        throw std::invalid_argument("cannot encode an empty passage");
    }
    const auto& config = model.config();
    auto& params = model.params();
    const std::size_t n = source.size();
    const std::size_t hidden = config.encoder_hidden;

    std::vector<std::size_t> word_ids(n);
    std::vector<std::size_t> meta_ids(n);
    for (std::size_t j = 0; j < n; ++j) {
        word_ids[j] = source.embedding_id(j);
        meta_ids[j] = static_cast<std::size_t>(source.meta[j]);
    }
    const ad::Var words = ad::lookup(tape.param(params.get("word_embedding")), word_ids);
    const ad::Var meta = ad::lookup(tape.param(params.get("meta_embedding")), meta_ids);
    const std::vector<ad::Var> inputs = nn::unstack_rows(ad::concat({words, meta}, 1));

    const auto fwd = nn::run_lstm(tape, params, encoder_cell(config, false), inputs, false);
    const auto bwd = nn::run_lstm(tape, params, encoder_cell(config, true), inputs, true);
    std::vector<ad::Var> rows;
    rows.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        rows.push_back(ad::concat({fwd[t], bwd[t]}));
    }
    const ad::Var u = ad::stack_rows(rows);

    // scores[t][j] = u_j . (W_s u_t)
    const ad::Var projected = ad::matmul(u, ad::transpose(tape.param(params.get("self_attention.W"))));
    const ad::Var alignment = ad::softmax(ad::matmul(projected, ad::transpose(u)), 1);
    const ad::Var s = ad::matmul(alignment, u);

    const ad::Var us = ad::concat({u, s}, 1);
    const ad::Var f = ad::tanh(ad::add_bias(ad::matmul(us, ad::transpose(tape.param(params.get("fusion.W")))),
                                            tape.param(params.get("fusion.b"))));
    const ad::Var g = ad::sigmoid(ad::add_bias(ad::matmul(us, ad::transpose(tape.param(params.get("gate.W")))),
                                               tape.param(params.get("gate.b"))));
    const ad::Var fused = ad::add(ad::mul(g, f), ad::mul(ad::one_minus(g), u));

    const ad::Var last = ad::concat({ad::slice(ad::row(fused, n - 1), 0, hidden),
                                     ad::slice(ad::row(fused, 0), hidden, 2 * hidden)});
    const ad::Var init = ad::tanh(ad::add(ad::matmul(tape.param(params.get("bridge.W")), last),
                                          tape.param(params.get("bridge.b"))));
    return {fused, alignment, init, &source, copy_segments(source)};
}

ad::Var initial_cell(ad::Tape& tape, const QGModel& model) {
    return tape.constant(Tensor::vector(std::vector<double>(model.config().decoder_hidden, 0.0)));
}

DecodeStep decode_step(ad::Tape& tape, QGModel& model, const EncodedPassage& encoded, std::size_t prev_token,
                       ad::Var h, ad::Var c) {
    auto& params = model.params();
    const TaggedSequence& source = *encoded.source;
    const std::size_t vocab_size = model.vocab().size();
    const std::size_t input_id = prev_token < vocab_size ? prev_token : Vocabulary::kUnk;

    DecodeStep step;
    const ad::Var x = ad::row(ad::lookup(tape.param(params.get("word_embedding")), std::span(&input_id, 1)), 0);
    std::tie(step.h, step.c) = decoder_cell(model.config()).step(tape, params, x, h, c);

    // e_j = d^T W_a u_j
    const ad::Var query = ad::matmul(ad::transpose(tape.param(params.get("attention.W"))), step.h);
    step.raw_attention = ad::matmul(encoded.states, query);
    step.attention = ad::softmax(step.raw_attention, 0);
    step.context = ad::matmul(ad::transpose(encoded.states), step.attention);
    step.generate_scores = ad::add(ad::matmul(tape.param(params.get("output.W")), ad::concat({step.h, step.context})),
                                   tape.param(params.get("output.b")));

    const ad::SegmentMax maxout = ad::segment_max(step.raw_attention, encoded.segments.positions);
    step.copy_scores = maxout.values;
    step.position_scores = ad::gather(maxout.values, encoded.segments.segment_of);

    const ad::Var joint = ad::softmax(ad::concat({step.generate_scores, step.position_scores}), 0);
    std::vector<std::size_t> targets(vocab_size + source.size());
    std::iota(targets.begin(), targets.begin() + static_cast<std::ptrdiff_t>(vocab_size), std::size_t{0});
    std::copy(source.ids.begin(), source.ids.end(), targets.begin() + static_cast<std::ptrdiff_t>(vocab_size));
    step.final_dist = ad::scatter_sum(joint, targets, source.extended_size());
    return step;
}

std::vector<std::size_t> target_ids(const TaggedSequence& source, std::span<const std::string> question,
                                    const Vocabulary& vocab) {
    std::vector<std::size_t> out;
    out.reserve(question.size() + 1);
    for (const auto& word : question) {
        out.push_back(source.target_id(word, vocab));
    }
    out.push_back(Vocabulary::kEos);
    return out;
}

ad::Var sequence_loss(ad::Tape& tape, QGModel& model, const TaggedSequence& source,
                      std::span<const std::size_t> targets) {
    if (targets.empty()) {
        throw std::invalid_argument("sequence_loss needs at least one target");
    }
    const EncodedPassage encoded = encode(tape, model, source);
    ad::Var h = encoded.final_state;
    ad::Var c = initial_cell(tape, model);
    std::size_t prev = Vocabulary::kSos;
    std::vector<ad::Var> losses;
    losses.reserve(targets.size());
    for (std::size_t gold : targets) {
        const DecodeStep step = decode_step(tape, model, encoded, prev, h, c);
        losses.push_back(ad::cross_entropy(step.final_dist, gold));
        h = step.h;
        c = step.c;
        prev = gold;
    }
    return ad::scale(ad::sum(ad::concat(losses)), 1.0 / static_cast<double>(targets.size()));
}

Vocabulary build_qg_vocab(std::span<const Example> dataset, std::size_t max_size) {
    std::vector<std::vector<std::string>> corpus;
    corpus.reserve(2 * dataset.size());
    for (const auto& ex : dataset) {
        corpus.push_back(ex.passage);
        corpus.push_back(ex.question);
    }
    return Vocabulary::build(corpus, max_size);
}

namespace {

struct Prepared {
    TaggedSequence source;
    std::vector<std::size_t> targets;
};

double corpus_token_loss(QGModel& model, const std::vector<Prepared>& data) {
    double total = 0.0;
    std::size_t tokens = 0;
    for (const auto& p : data) {
        ad::Tape tape;
        total += sequence_loss(tape, model, p.source, p.targets).item() * static_cast<double>(p.targets.size());
        tokens += p.targets.size();
    }
    return total / static_cast<double>(tokens);
}

}  // namespace

QGTrainResult train_qg(std::span<const Example> dataset, const QGConfig& config, const Vocabulary& vocab) {
    config.validate();
    if (dataset.empty()) {
        throw std::invalid_argument("cannot train the question generator on an empty dataset");
    }
    QGModel model = QGModel::initialize(config, vocab);
    std::vector<Prepared> data;
    data.reserve(dataset.size());
    for (const auto& ex : dataset) {
        Prepared p{build_qg_input(ex, config.insert_interrogative ? ex.iw_class : IWClass::Others, vocab), {}};
        p.targets = target_ids(p.source, ex.question, vocab);
        data.push_back(std::move(p));
    }

    nn::Adam adam({.lr = config.lr, .weight_decay = config.weight_decay});
    Rng shuffle_rng = Rng(config.seed).split(1);
    std::vector<QGEpochLog> log;
    log.push_back({0, corpus_token_loss(model, data)});

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        }
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            model.params().zero_grad();
            for (std::size_t k = start; k < stop; ++k) {
                const Prepared& p = data[order[k]];
                ad::Tape tape;
                tape.backward(sequence_loss(tape, model, p.source, p.targets));
            }
            nn::scale_grads(model.params(), 1.0 / static_cast<double>(stop - start));
            nn::clip_grad_norm(model.params(), config.max_grad_norm);
            adam.step(model.params());
        }
        log.push_back({epoch, corpus_token_loss(model, data)});
        if (config.target_loss > 0.0 && log.back().token_loss < config.target_loss) {
            break;
        }
    }
    model.params().zero_grad();
    return {std::move(model), std::move(log)};
}

Generation generate(const Example& example, IWClass predicted, QGModel& model, std::optional<std::size_t> max_len) {
    Generation out;
    out.source = build_qg_input(example, predicted, model.vocab());
    const std::size_t limit = max_len.value_or(model.config().max_len);
    ad::Tape tape;
    const EncodedPassage encoded = encode(tape, model, out.source);
    ad::Var h = encoded.final_state;
    ad::Var c = initial_cell(tape, model);
    std::size_t prev = Vocabulary::kSos;
    for (std::size_t t = 0; t < limit; ++t) {
        const DecodeStep step = decode_step(tape, model, encoded, prev, h, c);
        const auto& dist = step.final_dist.value().values();
        const std::size_t best = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
        const auto& att = step.attention.value().values();
        out.attention.emplace_back(att.begin(), att.end());
        out.ids.push_back(best);
        if (best == Vocabulary::kEos) {
            break;
        }
        out.tokens.push_back(out.source.word_of(best, model.vocab()));
        h = step.h;
        c = step.c;
        prev = best;
    }
    return out;
}

PipelineOutput pipeline_generate(const Example& example, const IWPredictor& predictor, QGModel& model) {
    PipelineOutput out;
    out.predicted = predictor(example);
    out.generation = generate(example, out.predicted, model);
    return out;
}

PipelineOutput pipeline_generate(const Example& example, ClassifierModel& classifier, QGModel& model) {
    return pipeline_generate(
        example, [&classifier](const Example& ex) { return predict_class(classifier, ex); }, model);
}

}  // namespace iwaqg
