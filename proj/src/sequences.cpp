// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/sequences.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace iwaqg {

namespace {

void check_span(const Example& example) {
    if (example.answer_begin >= example.answer_end || example.answer_end > example.passage.size()) {
        throw std::out_of_range(fmt::format("example '{}': answer span [{}, {}) out of range for {} tokens", example.id(),
                                            example.answer_begin, example.answer_end, example.passage.size()));
    }
}

}  // namespace

ClassifierInput build_classifier_input(const Example& example, bool answer_tagging) {
    check_span(example);
    ClassifierInput in;
    in.tokens.reserve(example.passage.size() + 4);
    in.tokens.emplace_back(Vocabulary::kReserved[Vocabulary::kCls]);
    for (std::size_t i = 0; i < example.passage.size(); ++i) {
        if (answer_tagging && i == example.answer_begin) {
            in.tokens.emplace_back(Vocabulary::kReserved[Vocabulary::kAns]);
        }
        if (i == example.answer_begin) {
            in.answer_begin = in.tokens.size();
        }
        in.tokens.push_back(example.passage[i]);
        if (i + 1 == example.answer_end) {
            in.answer_end = in.tokens.size();
            if (answer_tagging) {
                in.tokens.emplace_back(Vocabulary::kReserved[Vocabulary::kAns]);
            }
        }
    }
    in.tokens.emplace_back(Vocabulary::kReserved[Vocabulary::kSep]);
    return in;
}

std::size_t TaggedSequence::embedding_id(std::size_t position) const {
    const std::size_t id = ids.at(position);
    return id < vocab_size ? id : Vocabulary::kUnk;
}

std::size_t TaggedSequence::target_id(const std::string& word, const Vocabulary& vocab) const {
    if (auto id = vocab.find(word)) {
        return *id;
    }
    auto it = std::find(oov_words.begin(), oov_words.end(), word);
    if (it != oov_words.end()) {
        return vocab_size + static_cast<std::size_t>(it - oov_words.begin());
    }
    return Vocabulary::kUnk;
}

std::string TaggedSequence::word_of(std::size_t extended_id, const Vocabulary& vocab) const {
    if (extended_id < vocab_size) {
        return vocab.token(extended_id);
    }
    return oov_words.at(extended_id - vocab_size);
}

TaggedSequence build_qg_input(const Example& example, IWClass predicted, const Vocabulary& vocab) {
    check_span(example);
    TaggedSequence seq;
    seq.vocab_size = vocab.size();
    auto push = [&](const std::string& word, MetaTag tag) {
        std::size_t id = 0;
        if (auto known = vocab.find(word)) {
            id = *known;
        } else {
            auto it = std::find(seq.oov_words.begin(), seq.oov_words.end(), word);
            if (it == seq.oov_words.end()) {
                seq.oov_words.push_back(word);
                it = seq.oov_words.end() - 1;
            }
            id = vocab.size() + static_cast<std::size_t>(it - seq.oov_words.begin());
        }
        seq.words.push_back(word);
        seq.ids.push_back(id);
        seq.meta.push_back(tag);
    };
    const auto surface = surface_form(predicted);
    for (std::size_t i = 0; i < example.passage.size(); ++i) {
        if (i == example.answer_begin && surface) {
            seq.interrogative_position = seq.words.size();
            push(std::string(*surface), MetaTag::Interrogative);
        }
        const bool in_answer = i >= example.answer_begin && i < example.answer_end;
        push(example.passage[i], in_answer ? MetaTag::Answer : MetaTag::Context);
    }
    return seq;
}

}  // namespace iwaqg
