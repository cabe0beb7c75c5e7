// SPDX-License-Identifier: Apache-2.0
//
// Corpus metrics over tokenized questions: BLEU-1..4, ROUGE-L, METEOR-ex
// (exact and stem matching, no synonyms) and interrogative-word recall and
// precision.

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "iwaqg/labels.hpp"

namespace iwaqg {

using Sentence = std::vector<std::string>;

struct BleuStats {
    std::array<std::size_t, 4> clipped{};
    std::array<std::size_t, 4> candidate_ngrams{};
    std::array<std::size_t, 4> reference_ngrams{};
    std::size_t candidate_length = 0;
    std::size_t reference_length = 0;
};

// Clipped n-gram matches of one pair, for orders 1..4.
BleuStats bleu_pair_stats(const Sentence& candidate, const Sentence& reference);
BleuStats bleu_corpus_stats(std::span<const Sentence> candidates, std::span<const Sentence> references);
// Corpus BLEU-1..4 without smoothing.
std::array<double, 4> bleu(std::span<const Sentence> candidates, std::span<const Sentence> references);
std::array<double, 4> bleu_from_stats(const BleuStats& stats);

std::size_t lcs_length(const Sentence& a, const Sentence& b);
double rouge_l_pair(const Sentence& candidate, const Sentence& reference);
double rouge_l(std::span<const Sentence> candidates, std::span<const Sentence> references);

// Suffix-stripping stemmer used by the stem matching stage.
std::string stem(const std::string& word);

struct MeteorAlignment {
    std::size_t matches = 0;
    std::size_t chunks = 0;
    // ref_of[i] is the reference position aligned to candidate position i.
    std::vector<std::optional<std::size_t>> ref_of;
};

// One-to-one alignment where two words match when equal or when their stems
// are equal. Picks the most matches, then the fewest chunks, then the most
// exact matches.
MeteorAlignment meteor_align(const Sentence& candidate, const Sentence& reference);
double meteor_score(std::size_t matches, std::size_t chunks, std::size_t candidate_length,
                    std::size_t reference_length);
double meteor_pair(const Sentence& candidate, const Sentence& reference);
double meteor_ex(std::span<const Sentence> candidates, std::span<const Sentence> references);

struct IWRow {
    std::size_t support = 0;    // gold questions of the class
    std::size_t predicted = 0;  // generated questions of the class
    std::size_t correct = 0;
    std::optional<double> recall;
    std::optional<double> precision;
};

struct IWTable {
    std::array<IWRow, kNumIWClasses> rows{};
    double total_recall = 0.0;
    std::size_t size = 0;
};

IWTable iw_recall_precision(std::span<const Sentence> generated, std::span<const Sentence> gold);
std::string iw_table_text(const IWTable& table);

struct EvalReport {
    std::array<double, 4> bleu{};
    double rouge_l = 0.0;
    double meteor_ex = 0.0;
    IWTable iw;
    std::size_t size = 0;
};

EvalReport evaluate_corpus(std::span<const Sentence> candidates, std::span<const Sentence> references);
nlohmann::json to_json(const EvalReport& report);
std::string eval_csv_header();
std::string eval_csv_row(const std::string& run_id, const std::string& config_hash, const EvalReport& report);

}  // namespace iwaqg
