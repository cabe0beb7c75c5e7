// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "iwaqg/labels.hpp"

namespace iwaqg {

// Token <-> id bijection. The reserved block (special tokens, then the seven
// insertable interrogative words) always occupies ids 0..13.
class Vocabulary {
public:
    static constexpr std::array<std::string_view, 14> kReserved = {
        "[PAD]", "[UNK]", "[SOS]", "[EOS]", "[ANS]", "[CLS]", "[SEP]",
        "what",  "which", "where", "when",  "who",   "why",   "how"};
    static constexpr std::size_t kPad = 0;
    static constexpr std::size_t kUnk = 1;
    static constexpr std::size_t kSos = 2;
    static constexpr std::size_t kEos = 3;
    static constexpr std::size_t kAns = 4;
    static constexpr std::size_t kCls = 5;
    static constexpr std::size_t kSep = 6;
    static constexpr std::size_t kFirstInterrogative = 7;
    static constexpr std::size_t kNumReserved = kReserved.size();

    Vocabulary();

    // Reserved tokens first, then corpus tokens by descending frequency with
    // alphabetical tie-break, until the vocabulary holds max_size entries.
    static Vocabulary build(const std::vector<std::vector<std::string>>& corpus, std::size_t max_size);
    // Non-reserved tokens in id order.
    static Vocabulary from_tokens(const std::vector<std::string>& tokens);
    static Vocabulary load(const std::filesystem::path& path);

    // One non-reserved token per line; line k holds id kNumReserved + k.
    std::string to_text() const;

    std::size_t size() const { return tokens_.size(); }
    std::optional<std::size_t> find(std::string_view token) const;
    // Unknown tokens map to [UNK].
    std::size_t id(std::string_view token) const;
    const std::string& token(std::size_t id) const { return tokens_.at(id); }
    std::vector<std::string> non_reserved() const;
    std::size_t interrogative_id(IWClass c) const;
    // Git-style SHA-1 of to_text().
    std::string content_hash() const;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

private:
    void append(std::string token);

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::size_t> ids_;
};

}  // namespace iwaqg
