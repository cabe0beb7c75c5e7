// SPDX-License-Identifier: Apache-2.0
//
// Model input construction: the classifier's [CLS]/[SEP]/[ANS] sequence and
// the QG encoder's meta-tagged sequence with the inserted interrogative word.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "iwaqg/dataset.hpp"
#include "iwaqg/labels.hpp"
#include "iwaqg/vocabulary.hpp"

namespace iwaqg {

struct ClassifierInput {
    std::vector<std::string> tokens;
    // Positions of the answer tokens inside `tokens` (excluding [ANS] markers).
    std::size_t answer_begin = 0;
    std::size_t answer_end = 0;
};

// [CLS] passage [SEP]; with answer tagging, [ANS] is placed immediately
// before and after the answer span.
ClassifierInput build_classifier_input(const Example& example, bool answer_tagging);

enum class MetaTag : std::uint8_t { Interrogative = 0, Answer = 1, Context = 2 };
inline constexpr std::size_t kNumMetaTags = 3;

struct TaggedSequence {
    std::vector<std::string> words;
    // Vocabulary ids; out-of-vocabulary words get extended ids
    // vocab_size + k, where k indexes oov_words.
    std::vector<std::size_t> ids;
    std::vector<MetaTag> meta;
    std::vector<std::string> oov_words;
    std::size_t vocab_size = 0;
    std::optional<std::size_t> interrogative_position;

    std::size_t size() const { return ids.size(); }
    std::size_t extended_size() const { return vocab_size + oov_words.size(); }
    // Id for the encoder's embedding table: extended ids read as [UNK].
    std::size_t embedding_id(std::size_t position) const;
    // Decoder target id of a word: vocabulary id, extended id, or [UNK].
    std::size_t target_id(const std::string& word, const Vocabulary& vocab) const;
    std::string word_of(std::size_t extended_id, const Vocabulary& vocab) const;
};

// Inserts the interrogative word of `predicted` at the answer start (tagged
// Interrogative), tags the answer tokens Answer and everything else Context.
// Others inserts nothing.
TaggedSequence build_qg_input(const Example& example, IWClass predicted, const Vocabulary& vocab);

}  // namespace iwaqg
