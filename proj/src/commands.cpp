// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/commands.hpp"

#include <chrono>
#include <ctime>
#include <sstream>
#include <stdexcept>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "iwaqg/dataset.hpp"
#include "iwaqg/hashing.hpp"
#include "iwaqg/io.hpp"
#include "iwaqg/metrics.hpp"
#include "iwaqg/qg_model.hpp"
#include "iwaqg/tokenizer.hpp"

namespace iwaqg {

namespace {

// Collects outputs and their hashes, then publishes them with the manifest.
class Publisher {
public:
    Publisher(fs::path dir, RunManifest manifest) : dir_(std::move(dir)), manifest_(std::move(manifest)) {}

    void add(const std::string& name, std::string content) {
        manifest_.outputs[name] = git_blob_hash(content);
        batch_.add(dir_ / name, std::move(content));
    }

    void add_checkpoint(const std::string& name, std::string content) {
        manifest_.checkpoints[name] = git_blob_hash(content);
        batch_.add(dir_ / name, std::move(content));
    }

    RunManifest& manifest() { return manifest_; }

    void commit() {
        batch_.add(dir_ / "manifest.json", to_json(manifest_).dump(2) + "\n");
        fs::create_directories(dir_);
        batch_.commit();
    }

private:
    fs::path dir_;
    RunManifest manifest_;
    OutputBatch batch_;
};

RunManifest start_manifest(const std::string& command, const RunConfig& config) {
    RunManifest m;
    m.command = command;
    m.config = to_json(config);
    m.seeds = {{"run", config.seed}, {"classifier", config.classifier.seed}, {"qg", config.qg.seed}};
    return m;
}

void record_dataset(RunManifest& m, const fs::path& path) { m.datasets[path.generic_string()] = file_hash(path); }

std::vector<Example> load_nonempty(const fs::path& path) {
    auto examples = load_examples(path);
    if (examples.empty()) {
        throw std::runtime_error(fmt::format("{}: no records", path.string()));
    }
    return examples;
}

std::string join(const std::vector<std::string>& tokens) { return fmt::format("{}", fmt::join(tokens, " ")); }

nlohmann::json dump_line(const Example& ex, IWClass predicted, const std::string& source, const Generation& g) {
    const auto surface = surface_form(predicted);
    return {{"id", ex.id()},
            {"predicted_iw", to_string(predicted)},
            {"gold_iw", to_string(ex.iw_class)},
            {"iw_source", source},
            {"inserted_iw", surface ? nlohmann::json(std::string(*surface)) : nlohmann::json(nullptr)},
            {"source_tokens", g.source.words},
            {"generated", join(g.tokens)},
            {"gold", join(ex.question)},
            {"attention", g.attention}};
}

std::vector<IWClass> oracle_predictions(std::span<const Example> data, double accuracy, std::uint64_t seed,
                                        const ConfusionMatrix* confusion) {
    const Rng root(seed);
    std::vector<IWClass> out;
    out.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        Rng rng = root.split(i);
        out.push_back(oracle_classifier(data[i].iw_class, accuracy, rng, confusion));
    }
    return out;
}

QGModel load_qg(const fs::path& path) { return qg_from_checkpoint(read_checkpoint(path)); }

void check_vocab(const QGModel& model, const std::optional<fs::path>& vocab_path) {
    if (!vocab_path) {
        return;
    }
    const Vocabulary vocab = Vocabulary::load(*vocab_path);
    if (vocab.content_hash() != model.vocab().content_hash()) {
        throw std::runtime_error(fmt::format("vocabulary hash mismatch: {} has {}, checkpoint has {}",
                                             vocab_path->string(), vocab.content_hash(),
                                             model.vocab().content_hash()));
    }
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", tm);
}

}  // namespace

std::string format_accuracy(double value) { return fmt::format("{}", value); }

RunConfig resolve_config(const CommonOptions& options) {
    RunConfig config = options.config ? load_run_config(*options.config) : RunConfig{};
    if (options.seed) {
        config.set_seed(*options.seed);
    }
    config.validate();
    return config;
}

nlohmann::json to_json(const RunManifest& m) {
    return {{"command", m.command},   {"config", m.config},           {"seeds", m.seeds},
            {"datasets", m.datasets}, {"checkpoints", m.checkpoints}, {"outputs", m.outputs},
            {"notes", m.notes},       {"created_utc", utc_now()}};
}

void cmd_prepare(const PrepareOptions& options) {
    RunConfig config = resolve_config(options);
    if (options.cap) {
        config.data.cap = *options.cap;
        config.validate();
    }
    const auto records = read_jsonl(options.corpus);
    if (records.empty()) {
        throw std::runtime_error(fmt::format("{}: no records", options.corpus.string()));
    }
    const auto examples = ingest_all(records);
    const auto balanced = downsample(examples, config.data.cap, config.seed);
    const ClassCounts original = count_classes(examples);
    const ClassCounts after = count_classes(balanced);

    Publisher pub(options.out, start_manifest("prepare", config));
    record_dataset(pub.manifest(), options.corpus);
    pub.add("classifier_train.jsonl", examples_to_jsonl(balanced));
    pub.add("qg_train.jsonl", examples_to_jsonl(examples));
    pub.add("vocab.txt", build_qg_vocab(examples, config.qg.vocab_max_size).to_text());
    pub.add("class_stats.txt", class_stats_table(original, after));
    pub.add("class_stats.csv", class_stats_csv(original, after));
    if (options.eval_corpus) {
        const auto eval = ingest_all(read_jsonl(*options.eval_corpus));
        auto [dev, test] = split_examples(eval, config.data.dev_fraction, splitmix64(config.seed));
        record_dataset(pub.manifest(), *options.eval_corpus);
        pub.add("dev.jsonl", examples_to_jsonl(dev));
        pub.add("test.jsonl", examples_to_jsonl(test));
        pub.manifest().notes["eval_split"] = {{"dev", dev.size()}, {"test", test.size()}};
    }
    pub.manifest().notes["cap"] = config.data.cap;
    pub.commit();
}

void cmd_train(const TrainOptions& options) {
    RunConfig config = resolve_config(options);
    const auto data = load_nonempty(options.data);
    Publisher pub(options.out, start_manifest("train", config));
    record_dataset(pub.manifest(), options.data);
    pub.manifest().notes["kind"] = std::string(to_string(options.kind));
    if (options.vocab) {
        record_dataset(pub.manifest(), *options.vocab);
    }

    std::string log;
    if (options.kind == ModelKind::Classifier) {
        Vocabulary vocab;
        if (options.vocab) {
            vocab = Vocabulary::load(*options.vocab);
        } else {
            std::vector<std::vector<std::string>> corpus;
            for (const auto& ex : data) {
                corpus.push_back(ex.passage);
            }
            vocab = Vocabulary::build(corpus, config.classifier.vocab_max_size);
        }
        const auto result = train_classifier(data, config.classifier, vocab);
        log = "epoch,train_loss,train_accuracy,dev_accuracy\n";
        for (const auto& e : result.log) {
            log += fmt::format("{},{},{},{}\n", e.epoch, e.train_loss, e.train_accuracy, e.dev_accuracy);
        }
        pub.manifest().notes["best_epoch"] = result.best_epoch;
        pub.manifest().notes["train_accuracy"] = result.log[result.best_epoch].train_accuracy;
        pub.add_checkpoint("model.ckpt", serialize(to_checkpoint(result.model)));
    } else {
        const Vocabulary vocab =
            options.vocab ? Vocabulary::load(*options.vocab) : build_qg_vocab(data, config.qg.vocab_max_size);
        const auto result = train_qg(data, config.qg, vocab);
        log = "epoch,token_loss\n";
        for (const auto& e : result.log) {
            log += fmt::format("{},{}\n", e.epoch, e.token_loss);
        }
        pub.manifest().notes["final_token_loss"] = result.log.back().token_loss;
        pub.add_checkpoint("model.ckpt", serialize(to_checkpoint(result.model)));
    }
    pub.add("train_log.csv", log);
    pub.commit();
}

void cmd_generate(const GenerateOptions& options) {
    const int modes = (options.classifier ? 1 : 0) + (options.oracle_accuracy ? 1 : 0) + (options.no_insert ? 1 : 0);
    if (modes != 1) {
        throw std::invalid_argument("generate needs exactly one of --classifier, --oracle or --no-insert");
    }
    if (options.confusion && !options.oracle_accuracy) {
        throw std::invalid_argument("--confusion only applies together with --oracle");
    }
    RunConfig config = resolve_config(options);
    QGModel qg = load_qg(options.qg);
    check_vocab(qg, options.vocab);
    const auto data = load_nonempty(options.data);

    Publisher pub(options.out, start_manifest("generate", config));
    record_dataset(pub.manifest(), options.data);
    pub.manifest().checkpoints[options.qg.generic_string()] = file_hash(options.qg);

    std::vector<IWClass> predicted;
    std::string source;
    if (options.classifier) {
        ClassifierModel classifier = classifier_from_checkpoint(read_checkpoint(*options.classifier));
        pub.manifest().checkpoints[options.classifier->generic_string()] = file_hash(*options.classifier);
        for (const auto& ex : data) {
            predicted.push_back(predict_class(classifier, ex));
        }
        source = "model";
    } else if (options.oracle_accuracy) {
        std::optional<ConfusionMatrix> confusion;
        if (options.confusion) {
            confusion = read_confusion_matrix(*options.confusion);
            record_dataset(pub.manifest(), *options.confusion);
        }
        predicted = oracle_predictions(data, *options.oracle_accuracy, config.seed, confusion ? &*confusion : nullptr);
        source = "oracle@" + format_accuracy(*options.oracle_accuracy);
    } else {
        predicted.assign(data.size(), IWClass::Others);
        source = "none";
    }

    std::string dump;
    std::size_t no_insert = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Generation g = generate(data[i], predicted[i], qg);
        no_insert += g.source.interrogative_position ? 0 : 1;
        dump += dump_line(data[i], predicted[i], source, g).dump() + "\n";
    }
    pub.manifest().notes["iw_source"] = source;
    pub.manifest().notes["examples_without_insertion"] = no_insert;
    pub.add("generations.jsonl", std::move(dump));
    pub.commit();
}

std::string cmd_evaluate(const EvaluateOptions& options) {
    RunConfig config = resolve_config(options);
    const std::string content = read_file(options.dump);
    std::vector<Sentence> generated;
    std::vector<Sentence> gold;
    std::istringstream in(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            generated.push_back(split_whitespace(j.at("generated").get<std::string>()));
            gold.push_back(split_whitespace(j.at("gold").get<std::string>()));
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(fmt::format("{}:{}: {}", options.dump.string(), line_no, e.what()));
        }
    }
    if (gold.empty()) {
        throw std::runtime_error(fmt::format("{}: empty dump", options.dump.string()));
    }
    const EvalReport report = evaluate_corpus(generated, gold);
    const std::string table = iw_table_text(report.iw);

    Publisher pub(options.out, start_manifest("evaluate", config));
    record_dataset(pub.manifest(), options.dump);
    const std::string config_hash = git_blob_hash(to_json(config).dump());
    pub.add("report.json", to_json(report).dump(2) + "\n");
    pub.add("report.csv", eval_csv_header() + "\n" + eval_csv_row(options.dump.stem().string(), config_hash, report) + "\n");
    pub.add("iw_table.txt", table);
    pub.commit();
    return table;
}

void cmd_sweep(const SweepOptions& options) {
    RunConfig config = resolve_config(options);
    if (options.grid) {
        config.sweep.grid = *options.grid;
    }
    if (options.seeds) {
        config.sweep.seeds = *options.seeds;
    }
    config.validate();
    QGModel qg = load_qg(options.qg);
    const auto data = load_nonempty(options.data);

    Publisher pub(options.out, start_manifest("sweep", config));
    record_dataset(pub.manifest(), options.data);
    pub.manifest().checkpoints[options.qg.generic_string()] = file_hash(options.qg);

    const std::string header = "accuracy,seed,empirical_accuracy,bleu1,bleu2,bleu3,bleu4,rouge_l,meteor_ex,total_iw_recall";
    std::string rows = header + "\n";
    std::string means = "accuracy,seeds,empirical_accuracy,bleu1,bleu2,bleu3,bleu4,rouge_l,meteor_ex,total_iw_recall\n";
    std::vector<Sentence> gold;
    for (const auto& ex : data) {
        gold.push_back(ex.question);
    }
    for (double accuracy : config.sweep.grid) {
        std::array<double, 8> sum{};
        for (std::size_t s = 0; s < config.sweep.seeds; ++s) {
            const std::uint64_t seed = config.seed + s;
            const auto predicted = oracle_predictions(data, accuracy, seed, nullptr);
            std::vector<Sentence> generated;
            std::size_t hits = 0;
            for (std::size_t i = 0; i < data.size(); ++i) {
                generated.push_back(generate(data[i], predicted[i], qg).tokens);
                hits += predicted[i] == data[i].iw_class ? 1 : 0;
            }
            const EvalReport r = evaluate_corpus(generated, gold);
            const double empirical = static_cast<double>(hits) / static_cast<double>(data.size());
            const std::array<double, 8> values = {empirical,   r.bleu[0], r.bleu[1],   r.bleu[2],
                                                  r.bleu[3],   r.rouge_l, r.meteor_ex, r.iw.total_recall};
            for (std::size_t k = 0; k < values.size(); ++k) {
                sum[k] += values[k];
            }
            rows += fmt::format("{},{},{}\n", format_accuracy(accuracy), seed, fmt::join(values, ","));
        }
        for (auto& v : sum) {
            v /= static_cast<double>(config.sweep.seeds);
        }
        means += fmt::format("{},{},{}\n", format_accuracy(accuracy), config.sweep.seeds, fmt::join(sum, ","));
    }
    pub.add("sweep.csv", rows);
    pub.add("sweep_mean.csv", means);
    pub.commit();
}

std::vector<ClassifierConfig> ablation_configs(const ClassifierConfig& base) {
    auto make = [&](bool at, bool ae, bool ner) {
        ClassifierConfig c = base;
        c.use_answer_tagging = at;
        c.use_answer_embedding = ae;
        c.use_entity_type = ner;
        return c;
    };
    return {make(false, false, false), make(false, false, true), make(false, true, false), make(true, false, false),
            make(true, false, true)};
}

std::string cmd_ablate(const AblateOptions& options) {
    RunConfig config = resolve_config(options);
    const auto data = load_nonempty(options.data);
    const auto test = load_nonempty(options.test);
    Vocabulary vocab;
    if (options.vocab) {
        vocab = Vocabulary::load(*options.vocab);
    } else {
        std::vector<std::vector<std::string>> corpus;
        for (const auto& ex : data) {
            corpus.push_back(ex.passage);
        }
        vocab = Vocabulary::build(corpus, config.classifier.vocab_max_size);
    }

    Publisher pub(options.out, start_manifest("ablate", config));
    record_dataset(pub.manifest(), options.data);
    record_dataset(pub.manifest(), options.test);
    std::string csv = "row,answer_tagging,answer_embedding,entity_type,accuracy\n";
    std::string table = fmt::format("{:<16} {:>9}\n", "Model", "Accuracy");
    for (const auto& c : ablation_configs(config.classifier)) {
        auto result = train_classifier(data, c, vocab);
        const double accuracy = eval_classifier(test, result.model).accuracy;
        csv += fmt::format("{},{},{},{},{}\n", c.ablation_label(), c.use_answer_tagging, c.use_answer_embedding,
                           c.use_entity_type, accuracy);
        table += fmt::format("{:<16} {:>8.1f}%\n", c.ablation_label(), 100.0 * accuracy);
    }
    pub.add("ablation.csv", csv);
    pub.add("ablation.txt", table);
    pub.commit();
    return table;
}

ConfusionMatrix read_confusion_matrix(const fs::path& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    ConfusionMatrix m{};
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::vector<double> values;
        std::istringstream cells(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(cells, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) {
                numeric = false;
                break;
            }
            values.push_back(v);
        }
        if (!numeric) {
            if (row == 0) {
                continue;  // header
            }
            throw std::runtime_error(fmt::format("{}: non-numeric row {}", path.string(), row + 1));
        }
        if (row >= kNumIWClasses || values.size() != kNumIWClasses) {
            throw std::runtime_error(fmt::format("{}: expected 8 rows of 8 values", path.string()));
        }
        for (std::size_t c = 0; c < kNumIWClasses; ++c) {
            if (values[c] < 0.0) {
                throw std::runtime_error(fmt::format("{}: negative entry in row {}", path.string(), row + 1));
            }
            m[row][c] = values[c];
        }
        ++row;
    }
    if (row != kNumIWClasses) {
        throw std::runtime_error(fmt::format("{}: expected 8 rows of 8 values", path.string()));
    }
    return m;
}

}  // namespace iwaqg
