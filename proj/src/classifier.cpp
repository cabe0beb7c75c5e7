// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace iwaqg {

void ClassifierConfig::validate() const {
    if (num_classes != kNumIWClasses) {
        throw std::invalid_argument(fmt::format("classifier num_classes must be {}, got {}", kNumIWClasses, num_classes));
    }
    if (entity_embed_dim < 1) {
        throw std::invalid_argument("classifier entity_embed_dim must be at least 1");
    }
    if (embed_dim == 0 || encoder_hidden == 0 || encoder_layers == 0) {
        throw std::invalid_argument("classifier embed_dim, encoder_hidden and encoder_layers must be positive");
    }
    if (batch_size == 0) {
        throw std::invalid_argument("classifier batch_size must be positive");
    }
    if (!(lr > 0.0) || weight_decay < 0.0) {
        throw std::invalid_argument("classifier lr must be positive and weight_decay non-negative");
    }
    if (dev_fraction < 0.0 || dev_fraction >= 1.0) {
        throw std::invalid_argument("classifier dev_fraction must lie in [0, 1)");
    }
    if (vocab_max_size <= Vocabulary::kNumReserved) {
        throw std::invalid_argument("classifier vocab_max_size must exceed the reserved block");
    }
}

std::size_t ClassifierConfig::summary_width() const {
    const std::size_t states = 2 * encoder_hidden;
    return use_answer_embedding ? 2 * states : states;
}

std::size_t ClassifierConfig::feature_width() const {
    return summary_width() + (use_entity_type ? entity_embed_dim : 0);
}

std::string ClassifierConfig::ablation_label() const {
    std::string label = "CLS";
    if (use_answer_embedding) {
        label += " + AE";
    }
    if (use_answer_tagging) {
        label += " + AT";
    }
    if (use_entity_type) {
        label += " + NER";
    }
    return label;
}

nlohmann::json to_json(const ClassifierConfig& c) {
    return {{"use_answer_tagging", c.use_answer_tagging},
            {"use_answer_embedding", c.use_answer_embedding},
            {"use_entity_type", c.use_entity_type},
            {"embed_dim", c.embed_dim},
            {"encoder_hidden", c.encoder_hidden},
            {"encoder_layers", c.encoder_layers},
            {"entity_embed_dim", c.entity_embed_dim},
            {"num_classes", c.num_classes},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"lr", c.lr},
            {"weight_decay", c.weight_decay},
            {"max_grad_norm", c.max_grad_norm},
            {"dev_fraction", c.dev_fraction},
            {"vocab_max_size", c.vocab_max_size},
            {"seed", c.seed}};
}

ClassifierConfig classifier_config_from_json(const nlohmann::json& j) {
    ClassifierConfig c;
    c.use_answer_tagging = j.at("use_answer_tagging").get<bool>();
    c.use_answer_embedding = j.at("use_answer_embedding").get<bool>();
    c.use_entity_type = j.at("use_entity_type").get<bool>();
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.encoder_hidden = j.at("encoder_hidden").get<std::size_t>();
    c.encoder_layers = j.at("encoder_layers").get<std::size_t>();
    c.entity_embed_dim = j.at("entity_embed_dim").get<std::size_t>();
    c.num_classes = j.at("num_classes").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.lr = j.at("lr").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.max_grad_norm = j.at("max_grad_norm").get<double>();
    c.dev_fraction = j.at("dev_fraction").get<double>();
    c.vocab_max_size = j.at("vocab_max_size").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.validate();
    return c;
}

ClassifierModel::ClassifierModel(ClassifierConfig config, Vocabulary vocab)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
    config_.validate();
    register_params();
}

ClassifierModel ClassifierModel::initialize(const ClassifierConfig& config, const Vocabulary& vocab) {
    ClassifierModel model(config, vocab);
    Rng rng(config.seed);
    model.params_.init_uniform(rng);
    return model;
}

namespace {

nn::LstmCell encoder_cell(const ClassifierConfig& c, std::size_t layer, bool backward) {
    return {fmt::format("encoder.l{}.{}", layer, backward ? "bwd" : "fwd"),
            layer == 0 ? c.embed_dim : 2 * c.encoder_hidden, c.encoder_hidden};
}

}  // namespace

void ClassifierModel::register_params() {
    params_.add("token_embedding", {vocab_.size(), config_.embed_dim}, 1);
    for (std::size_t l = 0; l < config_.encoder_layers; ++l) {
        encoder_cell(config_, l, false).register_params(params_);
        encoder_cell(config_, l, true).register_params(params_);
    }
    if (config_.use_entity_type) {
        params_.add("entity_embedding", {kNumEntityTypes, config_.entity_embed_dim}, 1);
    }
    params_.add("output.W", {config_.num_classes, config_.feature_width()}, config_.feature_width());
    params_.add("output.b", {config_.num_classes}, config_.feature_width());
}

ad::Var encode_summary(ad::Tape& tape, ClassifierModel& model, const ClassifierInput& input) {
    if (input.tokens.empty()) {
        throw std::invalid_argument("cannot encode an empty classifier input");
    }
    const auto& config = model.config();
    auto& params = model.params();
    std::vector<std::size_t> ids;
    ids.reserve(input.tokens.size());
    for (const auto& tok : input.tokens) {
        ids.push_back(model.vocab().id(tok));
    }
    std::vector<ad::Var> layer_in = nn::unstack_rows(ad::lookup(tape.param(params.get("token_embedding")), ids));
    std::vector<ad::Var> fwd;
    std::vector<ad::Var> bwd;
    std::vector<ad::Var> states;
    for (std::size_t l = 0; l < config.encoder_layers; ++l) {
        fwd = nn::run_lstm(tape, params, encoder_cell(config, l, false), layer_in, false);
        bwd = nn::run_lstm(tape, params, encoder_cell(config, l, true), layer_in, true);
        states.clear();
        for (std::size_t t = 0; t < layer_in.size(); ++t) {
            states.push_back(ad::concat({fwd[t], bwd[t]}));
        }
        layer_in = states;
    }
    ad::Var summary = ad::concat({fwd.back(), bwd.front()});
    if (config.use_answer_embedding) {
        if (input.answer_begin >= input.answer_end || input.answer_end > states.size()) {
            throw std::out_of_range("answer positions out of range for the classifier input");
        }
        const ad::Var answer = ad::mean_rows(ad::stack_rows(states), input.answer_begin, input.answer_end);
        summary = ad::concat({summary, answer});
    }
    return summary;
}

ad::Var classifier_logits(ad::Tape& tape, ClassifierModel& model, const Example& example) {
    const auto& config = model.config();
    auto& params = model.params();
    const ClassifierInput input = build_classifier_input(example, config.use_answer_tagging);
    ad::Var features = encode_summary(tape, model, input);
    if (config.use_entity_type) {
        const std::size_t entity = code(example.entity_type);
        const ad::Var emb = ad::row(ad::lookup(tape.param(params.get("entity_embedding")), std::span(&entity, 1)), 0);
        features = ad::concat({features, emb});
    }
    return ad::add(ad::matmul(tape.param(params.get("output.W")), features), tape.param(params.get("output.b")));
}

std::array<double, kNumIWClasses> classify(ClassifierModel& model, const Example& example) {
    ad::Tape tape;
    const ad::Var dist = ad::softmax(classifier_logits(tape, model, example), 0);
    std::array<double, kNumIWClasses> out{};
    std::copy(dist.value().values().begin(), dist.value().values().end(), out.begin());
    return out;
}

IWClass predict_class(ClassifierModel& model, const Example& example) {
    const auto dist = classify(model, example);
    return iw_class_from_code(static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin()));
}

namespace {

double mean_loss(ClassifierModel& model, std::span<const Example> data) {
    double total = 0.0;
    for (const auto& ex : data) {
        ad::Tape tape;
        total += ad::cross_entropy(ad::softmax(classifier_logits(tape, model, ex), 0), code(ex.iw_class)).item();
    }
    return data.empty() ? 0.0 : total / static_cast<double>(data.size());
}

}  // namespace

ClassifierTrainResult train_classifier(std::span<const Example> dataset, const ClassifierConfig& config,
                                       const Vocabulary& vocab) {
    config.validate();
    if (dataset.empty()) {
        throw std::invalid_argument("cannot train the classifier on an empty dataset");
    }
    auto [dev, train] = split_examples(dataset, config.dev_fraction, splitmix64(config.seed ^ 0xde5));
    if (dev.empty() || train.empty()) {
        train.assign(dataset.begin(), dataset.end());
        dev = train;
    }

    ClassifierModel model = ClassifierModel::initialize(config, vocab);
    nn::Adam adam({.lr = config.lr, .weight_decay = config.weight_decay});
    Rng shuffle_rng = Rng(config.seed).split(1);

    std::vector<ClassifierEpochLog> log;
    log.push_back({0, mean_loss(model, train), eval_classifier(train, model).accuracy, eval_classifier(dev, model).accuracy});

    std::optional<nn::ParamSet> best;
    double best_dev = -1.0;
    std::size_t best_epoch = 0;
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        }
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            model.params().zero_grad();
            for (std::size_t k = start; k < stop; ++k) {
                const Example& ex = train[order[k]];
                ad::Tape tape;
                const ad::Var loss =
                    ad::cross_entropy(ad::softmax(classifier_logits(tape, model, ex), 0), code(ex.iw_class));
                loss_sum += loss.item();
                tape.backward(loss);
            }
            nn::scale_grads(model.params(), 1.0 / static_cast<double>(stop - start));
            nn::clip_grad_norm(model.params(), config.max_grad_norm);
            adam.step(model.params());
        }
        ClassifierEpochLog entry;
        entry.epoch = epoch;
        entry.train_loss = loss_sum / static_cast<double>(train.size());
        entry.train_accuracy = eval_classifier(train, model).accuracy;
        entry.dev_accuracy = eval_classifier(dev, model).accuracy;
        log.push_back(entry);
        if (entry.dev_accuracy > best_dev) {
            best_dev = entry.dev_accuracy;
            best_epoch = epoch;
            best = model.params();
        }
    }
    if (best) {
        model.params() = std::move(*best);
    }
    model.params().zero_grad();
    return {std::move(model), std::move(log), best_epoch};
}

ClassificationReport score_predictions(std::span<const IWClass> gold, std::span<const IWClass> predicted) {
    if (gold.size() != predicted.size()) {
        throw std::invalid_argument("gold and predicted label lists differ in length");
    }
    ClassificationReport report;
    report.size = gold.size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        auto& g = report.per_class[code(gold[i])];
        ++g.support;
        ++report.per_class[code(predicted[i])].predicted;
        if (gold[i] == predicted[i]) {
            ++g.correct;
            ++correct;
        }
    }
    for (auto& m : report.per_class) {
        if (m.support > 0) {
            m.recall = static_cast<double>(m.correct) / static_cast<double>(m.support);
        }
        if (m.predicted > 0) {
            m.precision = static_cast<double>(m.correct) / static_cast<double>(m.predicted);
        }
    }
    report.accuracy = gold.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(gold.size());
    return report;
}

ClassificationReport eval_classifier(std::span<const Example> dataset, ClassifierModel& model) {
    std::vector<IWClass> gold;
    std::vector<IWClass> predicted;
    for (const auto& ex : dataset) {
        gold.push_back(ex.iw_class);
        predicted.push_back(predict_class(model, ex));
    }
    return score_predictions(gold, predicted);
}

nlohmann::json to_json(const ClassificationReport& report) {
    nlohmann::json classes = nlohmann::json::object();
    for (auto c : kAllIWClasses) {
        const auto& m = report.per_class[code(c)];
        classes[std::string(to_string(c))] = {
            {"support", m.support},
            {"predicted", m.predicted},
            {"recall", m.recall ? nlohmann::json(*m.recall) : nlohmann::json(nullptr)},
            {"precision", m.precision ? nlohmann::json(*m.precision) : nlohmann::json(nullptr)}};
    }
    return {{"accuracy", report.accuracy}, {"size", report.size}, {"classes", classes}};
}

IWClass oracle_classifier(IWClass gold, double accuracy, Rng& rng, const ConfusionMatrix* confusion) {
    if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
        throw std::invalid_argument(fmt::format("oracle accuracy must lie in [0, 1], got {}", accuracy));
    }
    if (rng.uniform() < accuracy) {
        return gold;
    }
    const std::size_t g = code(gold);
    if (confusion != nullptr) {
        const auto& row = (*confusion)[g];
        double total = 0.0;
        for (std::size_t c = 0; c < kNumIWClasses; ++c) {
            if (c != g) {
                total += std::max(0.0, row[c]);
            }
        }
        if (total > 0.0) {
            double u = rng.uniform() * total;
            std::size_t last = g;
            for (std::size_t c = 0; c < kNumIWClasses; ++c) {
                if (c == g || row[c] <= 0.0) {
                    continue;
                }
                last = c;
                u -= row[c];
                if (u < 0.0) {
                    return iw_class_from_code(c);
                }
            }
            return iw_class_from_code(last);
        }
    }
    const std::size_t k = rng.below(kNumIWClasses - 1);
    return iw_class_from_code(k < g ? k : k + 1);
}

}  // namespace iwaqg
