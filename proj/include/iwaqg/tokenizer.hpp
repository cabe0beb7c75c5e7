// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace iwaqg {

struct Token {
    std::string text;
    // Byte offsets of the token in the source string.
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Lowercases ASCII letters and splits punctuation into separate tokens.
// Hyphens between word characters and separators inside numbers ("1,000",
// "3.5") stay attached; English clitics split off ("newcastle's" ->
// "newcastle", "'s"; "don't" -> "do", "n't"). Non-ASCII bytes count as word
// characters.
std::vector<Token> tokenize_with_offsets(std::string_view text);
std::vector<std::string> tokenize(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens);
// Splits on ASCII whitespace; used for already-tokenised text.
std::vector<std::string> split_whitespace(std::string_view text);

}  // namespace iwaqg
