// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/tokenizer.hpp"

#include <array>
#include <cctype>

namespace iwaqg {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_word(unsigned char c) { return c >= 0x80 || std::isalnum(c) != 0; }
bool is_digit(unsigned char c) { return std::isdigit(c) != 0; }
bool is_alpha(unsigned char c) { return std::isalpha(c) != 0; }

char lower(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 ? static_cast<char>(std::tolower(u)) : c;
}

std::string lowered(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        c = lower(c);
    }
    return out;
}

// Letters directly after position `at`, lowercased.
std::string letters_after(std::string_view text, std::size_t at) {
    std::string out;
    for (std::size_t i = at; i < text.size() && is_alpha(static_cast<unsigned char>(text[i])); ++i) {
        out.push_back(lower(text[i]));
    }
    return out;
}

bool is_clitic(const std::string& suffix) {
    static const std::array<std::string_view, 6> kClitics = {"s", "re", "ve", "ll", "d", "m"};
    for (auto c : kClitics) {
        if (suffix == c) {
            return true;
        }
    }
    return false;
}

// A clitic must end the word: "'s" followed by another letter is not one.
bool clitic_ends_word(std::string_view text, std::size_t apostrophe, const std::string& suffix) {
    const std::size_t after = apostrophe + 1 + suffix.size();
    return after >= text.size() || !is_word(static_cast<unsigned char>(text[after]));
}

}  // namespace

std::vector<Token> tokenize_with_offsets(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto at = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
    auto emit = [&](std::size_t b, std::size_t e) { tokens.push_back({lowered(text.substr(b, e - b)), b, e}); };

    while (i < n) {
        const unsigned char c = at(i);
        if (is_space(c)) {
            ++i;
            continue;
        }
        if (is_word(c)) {
            const std::size_t start = i;
            std::size_t j = i + 1;
            while (j < n) {
                const unsigned char d = at(j);
                if (is_word(d)) {
                    ++j;
                    continue;
                }
                const bool next_word = j + 1 < n && is_word(at(j + 1));
                if (d == '-' && next_word) {
                    ++j;
                    continue;
                }
                if ((d == '.' || d == ',') && is_digit(at(j - 1)) && j + 1 < n && is_digit(at(j + 1))) {
                    ++j;
                    continue;
                }
                if (d == '\'' && j + 1 < n && is_alpha(at(j + 1))) {
                    const std::string suffix = letters_after(text, j + 1);
                    if (is_clitic(suffix) && clitic_ends_word(text, j, suffix)) {
                        break;
                    }
                    if (suffix == "t" && clitic_ends_word(text, j, suffix) && lower(text[j - 1]) == 'n' &&
                        j - 1 > start) {
                        j -= 1;  // "n't" becomes its own token
                        break;
                    }
                    ++j;
                    continue;
                }
                break;
            }
            emit(start, j);
            i = j;
            continue;
        }
        if (c == '\'' && i + 1 < n && is_alpha(at(i + 1))) {
            const std::string suffix = letters_after(text, i + 1);
            if (is_clitic(suffix) && clitic_ends_word(text, i, suffix)) {
                emit(i, i + 1 + suffix.size());
                i += 1 + suffix.size();
                continue;
            }
        }
        emit(i, i + 1);
        ++i;
    }
    return tokens;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : tokenize_with_offsets(text)) {
        out.push_back(std::move(t.text));
    }
    return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            out.push_back(' ');
        }
        out += tokens[i];
    }
    return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        std::size_t j = i;
        while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) {
            ++j;
        }
        if (j > i) {
            out.emplace_back(text.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

}  // namespace iwaqg
