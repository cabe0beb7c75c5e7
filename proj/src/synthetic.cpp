// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/synthetic.hpp"

#include <array>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "iwaqg/rng.hpp"

namespace iwaqg {

namespace {

struct ClassLexicon {
    const char* entity;
    const char* question;  // {} is the phrase preceding the answer
    const char* prefix;    // prepended to the answer word
    std::array<const char*, 12> train;
    std::array<const char*, 6> held_out;
};

// Indexed by IWClass code.
const std::array<ClassLexicon, kNumIWClasses> kLexicons = {{
    {"MISC", "what item is listed after {} ?", "",
     {"lantern", "compass", "violin", "saddle", "teapot", "anchor", "kettle", "ladder", "mirror", "basket", "helmet",
      "candle"},
     {"quilt", "trumpet", "hammock", "easel", "sled", "crate"}},
    {"ORG", "which company is listed after {} ?", "",
     {"acme", "globex", "initech", "umbrella", "hooli", "vandelay", "wonka", "cyberdyne", "soylent", "tyrell",
      "oscorp", "pinnacle"},
     {"stark", "nakatomi", "gringotts", "monarch", "veridian", "massive"}},
    {"GPE", "where is the place listed after {} ?", "",
     {"paris", "lagos", "lima", "oslo", "quito", "cairo", "delhi", "hanoi", "kyoto", "perth", "sofia", "tunis"},
     {"accra", "baku", "dakar", "minsk", "riga", "suva"}},
    {"DATE", "when is the date listed after {} ?", "",
     {"january", "february", "march", "april", "may", "june", "july", "august", "september", "october", "november",
      "december"},
     {"monday", "tuesday", "wednesday", "thursday", "friday", "sunday"}},
    {"PERSON", "who is listed after {} ?", "",
     {"alice", "bruno", "carmen", "dmitri", "elena", "farid", "greta", "hiro", "ingrid", "jonas", "kofi", "lena"},
     {"marta", "nikos", "olga", "pavel", "quinn", "rosa"}},
    {"NONE", "why is the reason listed after {} ?", "because of ",
     {"rain", "floods", "drought", "debt", "war", "fire", "strikes", "frost", "storms", "famine", "plague", "taxes"},
     {"smoke", "riots", "tides", "wind", "fog", "erosion"}},
    {"CARDINAL", "how many are listed after {} ?", "",
     {"twelve", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety", "seven", "eleven", "twenty",
      "nine"},
     {"3", "17", "42", "88", "105", "260"}},
    {"NONE", "name the title listed after {} .", "",
     {"odyssey", "hamlet", "beowulf", "ulysses", "dracula", "emma", "walden", "macbeth", "candide", "faust",
      "persuasion", "aeneid"},
     {"rebecca", "ivanhoe", "middlemarch", "frankenstein", "utopia", "kidnapped"}},
}};

std::string draw_phrase(std::size_t cls, LexiconPool pool, Rng& rng) {
    const ClassLexicon& lex = kLexicons[cls];
    const char* word = pool == LexiconPool::Train ? lex.train[rng.below(lex.train.size())]
                                                  : lex.held_out[rng.below(lex.held_out.size())];
    return std::string(lex.prefix) + word;
}

}  // namespace

std::vector<RawRecord> make_synthetic(const SyntheticOptions& options) {
    if (options.slots < 2) {
        throw std::invalid_argument("synthetic passages need at least two slots");
    }
    std::vector<RawRecord> out;
    out.reserve(options.per_class * kNumIWClasses);
    for (std::size_t cls = 0; cls < kNumIWClasses; ++cls) {
        Rng rng = Rng(options.seed).split(cls);
        for (std::size_t k = 0; k < options.per_class; ++k) {
            const std::size_t answer_slot = 1 + rng.below(options.slots - 1);
            std::vector<std::string> phrases(options.slots);
            for (std::size_t s = 0; s < options.slots; ++s) {
                phrases[s] = s == answer_slot ? draw_phrase(cls, options.pool, rng)
                                              : draw_phrase(rng.below(kNumIWClasses), options.pool, rng);
            }
            std::string passage = "the record lists ";
            std::size_t answer_start = 0;
            for (std::size_t s = 0; s < options.slots; ++s) {
                if (s > 0) {
                    passage += s + 1 == options.slots ? " and " : " , ";
                }
                if (s == answer_slot) {
                    answer_start = passage.size();
                }
                passage += phrases[s];
            }
            passage += " .";
            RawRecord r;
            r.id = fmt::format("{}-{}-{:03}", options.id_prefix, to_string(iw_class_from_code(cls)), k);
            r.passage = passage;
            r.answer_start = answer_start;  // the text is ASCII, so bytes == code points
            r.answer_text = phrases[answer_slot];
            r.question = fmt::format(fmt::runtime(kLexicons[cls].question), phrases[answer_slot - 1]);
            r.entity_type = kLexicons[cls].entity;
            out.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace iwaqg
