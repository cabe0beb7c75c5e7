// SPDX-License-Identifier: Apache-2.0
//
// The experiment commands behind the iwaqg CLI. Each command reads its
// inputs, computes everything in memory and then publishes all outputs (plus
// manifest.json) into its output directory in one atomic batch. Failures
// throw and leave no outputs behind.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iwaqg/checkpoint.hpp"
#include "iwaqg/classifier.hpp"
#include "iwaqg/config.hpp"

namespace iwaqg {

namespace fs = std::filesystem;

struct CommonOptions {
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> config;
    fs::path out;
};

// Defaults, overridden by the config file, then by --seed. Validated.
RunConfig resolve_config(const CommonOptions& options);

struct RunManifest {
    std::string command;
    nlohmann::json config;
    nlohmann::json seeds = nlohmann::json::object();
    std::map<std::string, std::string> datasets;     // path -> content hash
    std::map<std::string, std::string> checkpoints;  // name -> content hash
    std::map<std::string, std::string> outputs;      // name -> content hash
    nlohmann::json notes = nlohmann::json::object();
};

// Adds a UTC creation timestamp.
nlohmann::json to_json(const RunManifest& manifest);

struct PrepareOptions : CommonOptions {
    fs::path corpus;
    // Split by data.dev_fraction into dev.jsonl and test.jsonl.
    std::optional<fs::path> eval_corpus;
    std::optional<std::size_t> cap;
};

// Writes classifier_train.jsonl (balanced), qg_train.jsonl (all records),
// vocab.txt, class_stats.txt and class_stats.csv.
void cmd_prepare(const PrepareOptions& options);

struct TrainOptions : CommonOptions {
    ModelKind kind = ModelKind::QG;
    fs::path data;
    std::optional<fs::path> vocab;
};

// Writes model.ckpt and train_log.csv.
void cmd_train(const TrainOptions& options);

struct GenerateOptions : CommonOptions {
    fs::path qg;
    fs::path data;
    std::optional<fs::path> classifier;
    std::optional<double> oracle_accuracy;
    std::optional<fs::path> confusion;
    // Baseline path: nothing is inserted for any example.
    bool no_insert = false;
    std::optional<fs::path> vocab;
};

// Writes generations.jsonl.
void cmd_generate(const GenerateOptions& options);

struct EvaluateOptions : CommonOptions {
    fs::path dump;
};

// Writes report.json, report.csv and iw_table.txt; returns the IW table text.
std::string cmd_evaluate(const EvaluateOptions& options);

struct SweepOptions : CommonOptions {
    fs::path qg;
    fs::path data;
    std::optional<std::vector<double>> grid;
    std::optional<std::size_t> seeds;
};

// Writes sweep.csv (one row per accuracy and seed) and sweep_mean.csv.
void cmd_sweep(const SweepOptions& options);

struct AblateOptions : CommonOptions {
    fs::path data;
    fs::path test;
    std::optional<fs::path> vocab;
};

// Writes ablation.csv and ablation.txt; returns the table text.
std::string cmd_ablate(const AblateOptions& options);

// The five ablation rows in table order.
std::vector<ClassifierConfig> ablation_configs(const ClassifierConfig& base);

// Reads an 8x8 row-stochastic matrix from CSV (rows and columns in class
// order; an optional header line naming the classes is skipped).
ConfusionMatrix read_confusion_matrix(const fs::path& path);

// Shortest round-trip decimal form, used wherever accuracies are echoed.
std::string format_accuracy(double value);

}  // namespace iwaqg
