// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "iwaqg/hashing.hpp"

namespace iwaqg {

Vocabulary::Vocabulary() {
    for (auto t : kReserved) {
        append(std::string(t));
    }
}

void Vocabulary::append(std::string token) {
    if (ids_.contains(token)) {
        throw std::invalid_argument("duplicate vocabulary token: " + token);
    }
    ids_.emplace(token, tokens_.size());
    tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus, std::size_t max_size) {
    Vocabulary vocab;
    std::map<std::string, std::size_t> counts;
    for (const auto& sentence : corpus) {
        for (const auto& tok : sentence) {
            if (!vocab.ids_.contains(tok)) {
                ++counts[tok];
            }
        }
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    // counts is alphabetical already; stable sort keeps that order within equal counts.
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (auto& [tok, n] : ranked) {
        if (vocab.size() >= max_size) {
            break;
        }
        vocab.append(tok);
    }
    return vocab;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
    Vocabulary vocab;
    for (const auto& t : tokens) {
        vocab.append(t);
    }
    return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open vocabulary file " + path.string());
    }
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        tokens.push_back(line);
    }
    return from_tokens(tokens);
}

std::string Vocabulary::to_text() const {
    std::string out;
    for (std::size_t i = kNumReserved; i < tokens_.size(); ++i) {
        out += tokens_[i];
        out.push_back('\n');
    }
    return out;
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    if (it == ids_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t Vocabulary::id(std::string_view token) const { return find(token).value_or(kUnk); }

std::vector<std::string> Vocabulary::non_reserved() const {
    return {tokens_.begin() + static_cast<std::ptrdiff_t>(kNumReserved), tokens_.end()};
}

std::size_t Vocabulary::interrogative_id(IWClass c) const {
    if (c == IWClass::Others) {
        throw std::invalid_argument("class 'others' has no interrogative token");
    }
    return kFirstInterrogative + code(c);
}

std::string Vocabulary::content_hash() const { return git_blob_hash(to_text()); }

}  // namespace iwaqg
