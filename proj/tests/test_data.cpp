// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "iwaqg/dataset.hpp"
#include "iwaqg/rng.hpp"
#include "iwaqg/sequences.hpp"
#include "iwaqg/synthetic.hpp"
#include "iwaqg/tokenizer.hpp"
#include "iwaqg/vocabulary.hpp"

using namespace iwaqg;

namespace {

using Tokens = std::vector<std::string>;

RawRecord record(std::string id, std::string passage, std::string answer, std::string question,
                 std::optional<std::string> entity = std::nullopt) {
    RawRecord r;
    r.id = std::move(id);
    r.answer_start = passage.find(answer);
    r.passage = std::move(passage);
    r.answer_text = std::move(answer);
    r.question = std::move(question);
    r.entity_type = std::move(entity);
    return r;
}

Example owner_example() {
    return ingest(record("t1", "The owner of the project produces a list of requirements.", "The owner",
                         "Who produces a list of requirements for a project?"));
}

}  // namespace

TEST_CASE("tokenize examples") {
    CHECK(tokenize("Who produces it?") == Tokens{"who", "produces", "it", "?"});
    CHECK(tokenize("newcastle's") == Tokens{"newcastle", "'s"});
    CHECK(tokenize("").empty());
}

TEST_CASE("tokenize is idempotent on tokenized lowercase text") {
    for (const char* text : {"The owner's plan, in 1999, cost $5.", "In which year did WWII start?",
                             "via the Metro Light Rail system"}) {
        const auto once = tokenize(text);
        CHECK(tokenize(join_tokens(once)) == once);
    }
}

TEST_CASE("tokenize offsets point into the source text") {
    const std::string text = "Hello, World";
    const auto toks = tokenize_with_offsets(text);
    REQUIRE(toks.size() == 3);
    CHECK(text.substr(toks[2].begin, toks[2].end - toks[2].begin) == "World");
}

TEST_CASE("label_interrogative_class examples") {
    CHECK(label_interrogative_class(tokenize("who produces a list of requirements for a project ?")) == IWClass::Who);
    CHECK(label_interrogative_class(tokenize("in which year did wwii start ?")) == IWClass::Which);
    CHECK(label_interrogative_class(tokenize("name the capital .")) == IWClass::Others);
    CHECK(label_interrogative_class(tokenize("to whom was it given ?")) == IWClass::Who);
    CHECK(label_interrogative_class(tokenize("whose idea was it ?")) == IWClass::Who);
    CHECK(label_interrogative_class(tokenize("how and why ?")) == IWClass::How);
    CHECK(label_interrogative_class(Tokens{}) == IWClass::Others);
}

TEST_CASE("iw class codes are stable") {
    for (std::size_t i = 0; i < kNumIWClasses; ++i) {
        CHECK(code(kAllIWClasses[i]) == i);
        CHECK(parse_iw_class(to_string(kAllIWClasses[i])) == kAllIWClasses[i]);
    }
    CHECK_FALSE(surface_form(IWClass::Others).has_value());
    CHECK(surface_form(IWClass::Why) == std::string_view("why"));
}

TEST_CASE("downsample keeps min(count, cap) per class") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<IWClass> labels(50 + rng.below(300));
        for (auto& l : labels) {
            l = iw_class_from_code(rng.below(kNumIWClasses));
        }
        const std::size_t cap = 1 + rng.below(60);
        const auto before = count_classes(labels);
        const auto kept = downsample_indices(labels, cap, trial);
        std::vector<IWClass> sampled;
        for (auto i : kept) {
            sampled.push_back(labels[i]);
        }
        const auto after = count_classes(sampled);
        for (std::size_t c = 0; c < kNumIWClasses; ++c) {
            CHECK(after[c] == std::min(before[c], cap));
        }
        CHECK(std::adjacent_find(kept.begin(), kept.end()) == kept.end());
        CHECK(kept == downsample_indices(labels, cap, trial));
    }
    CHECK_THROWS(downsample_indices(std::vector<IWClass>{IWClass::What}, 0, 1));
}

TEST_CASE("downsample reproduces the balanced class table") {
    const ClassCounts original = {50385, 6111, 3731, 5437, 9162, 1224, 9408, 9408};
    const ClassCounts expected = {4000, 4000, 3731, 4000, 4000, 1224, 4000, 4000};
    std::vector<IWClass> labels;
    for (std::size_t c = 0; c < kNumIWClasses; ++c) {
        labels.insert(labels.end(), original[c], iw_class_from_code(c));
    }
    std::vector<IWClass> sampled;
    for (auto i : downsample_indices(labels, 4000, 1)) {
        sampled.push_back(labels[i]);
    }
    CHECK(count_classes(sampled) == expected);
    const auto table = class_stats_table(original, expected);
    CHECK(table.find("50385") != std::string::npos);
}

TEST_CASE("entity rule examples") {
    CHECK(tag_entity_rule("Japan") == EntityType::LocationGpe);
    CHECK(tag_entity_rule("1224") == EntityType::Numeric);
    CHECK(tag_entity_rule("via the Metro Light Rail system") == EntityType::None);
    CHECK(tag_entity_rule("three hundred") == EntityType::Numeric);
    CHECK(tag_entity_rule("March 1915") == EntityType::DateTime);
    CHECK(tag_entity_rule("") == EntityType::None);
}

TEST_CASE("dataset entity labels take precedence and unknown labels are rejected") {
    CHECK(ingest(record("e1", "It was Japan.", "Japan", "Which country?", "PERSON")).entity_type ==
          EntityType::Person);
    CHECK(map_entity_label("GPE") == EntityType::LocationGpe);
    CHECK(map_entity_label("none") == EntityType::None);
    CHECK_FALSE(map_entity_label("spaceship").has_value());
    CHECK_THROWS_AS(ingest(record("e2", "It was Japan.", "Japan", "Which country?", "spaceship")), IngestError);
}

TEST_CASE("ingest maps character offsets to token spans") {
    const auto ex = owner_example();
    CHECK(ex.answer_begin == 0);
    CHECK(ex.answer_end == 2);
    CHECK(ex.iw_class == IWClass::Who);
    CHECK(join_tokens(Tokens(ex.passage.begin() + ex.answer_begin, ex.passage.begin() + ex.answer_end)) ==
          join_tokens(tokenize(ex.source.answer_text)));
}

TEST_CASE("ingest failures list the offending ids") {
    RawRecord bad = record("bad-1", "short passage", "short", "what ?");
    bad.answer_start = 100;
    RawRecord good = record("good", "short passage", "short", "what ?");
    RawRecord bad2 = record("bad-2", "short passage", "short", "what ?");
    bad2.answer_text = "missing";
    try {
        ingest_all(std::vector<RawRecord>{bad, good, bad2});
        FAIL("expected an ingest error");
    } catch (const IngestError& e) {
        CHECK(e.ids() == std::vector<std::string>{"bad-1", "bad-2"});
    }
    CHECK_THROWS_AS(parse_jsonl("{\"id\": \"x\"}\n"), IngestError);
}

TEST_CASE("jsonl round trip") {
    const auto r = record("j1", "A passage here.", "passage", "What is it?", "MISC");
    const auto parsed = parse_jsonl(record_to_json(r).dump() + "\n");
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].id == "j1");
    CHECK(parsed[0].answer_start == r.answer_start);
    CHECK(parsed[0].entity_type == std::optional<std::string>("MISC"));
}

TEST_CASE("classifier input with and without answer tagging") {
    const auto ex = ingest(record("c1", "Built by the owner in 1990.", "the owner", "Who built it?"));
    const auto tagged = build_classifier_input(ex, true);
    CHECK(tagged.tokens == Tokens{"[CLS]", "built", "by", "[ANS]", "the", "owner", "[ANS]", "in", "1990", ".", "[SEP]"});
    CHECK(tagged.answer_begin == 4);
    CHECK(tagged.answer_end == 6);
    const auto plain = build_classifier_input(ex, false);
    CHECK(plain.tokens == Tokens{"[CLS]", "built", "by", "the", "owner", "in", "1990", ".", "[SEP]"});

    const auto first = owner_example();
    CHECK(build_classifier_input(first, true).tokens[1] == "[ANS]");

    Example broken = ex;
    broken.answer_end = 99;
    CHECK_THROWS(build_classifier_input(broken, true));
}

TEST_CASE("qg input inserts the interrogative word before the answer") {
    const Vocabulary vocab;
    const auto ex = ingest(record("q1", "Built by the owner in 1990.", "the owner", "Who built it?"));
    const auto seq = build_qg_input(ex, IWClass::Who, vocab);
    CHECK(seq.words == Tokens{"built", "by", "who", "the", "owner", "in", "1990", "."});
    CHECK(seq.meta[2] == MetaTag::Interrogative);
    CHECK(seq.meta[3] == MetaTag::Answer);
    CHECK(seq.meta[4] == MetaTag::Answer);
    CHECK(seq.meta[5] == MetaTag::Context);
    CHECK(seq.interrogative_position == std::optional<std::size_t>(2));
    CHECK(seq.ids[2] == vocab.interrogative_id(IWClass::Who));

    const auto at_start = build_qg_input(owner_example(), IWClass::What, vocab);
    CHECK(at_start.words[0] == "what");

    const auto others = build_qg_input(ex, IWClass::Others, vocab);
    CHECK(others.words == ex.passage);
    CHECK(std::none_of(others.meta.begin(), others.meta.end(),
                       [](MetaTag m) { return m == MetaTag::Interrogative; }));
}

TEST_CASE("qg input round trip and oov ids") {
    const auto corpus = make_synthetic({.per_class = 3, .seed = 4});
    const Vocabulary vocab = Vocabulary::build({tokenize("the record lists and")}, 100);
    for (const auto& r : corpus) {
        const auto ex = ingest(r);
        for (auto c : kAllIWClasses) {
            const auto seq = build_qg_input(ex, c, vocab);
            REQUIRE(seq.words.size() == seq.meta.size());
            Tokens stripped;
            for (std::size_t i = 0; i < seq.size(); ++i) {
                if (seq.meta[i] != MetaTag::Interrogative) {
                    stripped.push_back(seq.words[i]);
                }
                CHECK(seq.word_of(seq.ids[i], vocab) == seq.words[i]);
                CHECK(seq.embedding_id(i) < vocab.size());
            }
            CHECK(stripped == ex.passage);
        }
    }
}

TEST_CASE("vocabulary examples") {
    const auto v = Vocabulary::build({{"a", "a", "b"}}, 100);
    CHECK(v.size() == Vocabulary::kNumReserved + 2);
    CHECK(v.id("a") == Vocabulary::kNumReserved);
    CHECK(v.id("b") == Vocabulary::kNumReserved + 1);
    CHECK(v.id("[PAD]") == Vocabulary::kPad);
    CHECK(v.interrogative_id(IWClass::What) == Vocabulary::kFirstInterrogative);

    const auto small = Vocabulary::build({{"a", "a", "b", "c", "c", "c"}}, Vocabulary::kNumReserved + 1);
    CHECK(small.id("c") == Vocabulary::kNumReserved);
    CHECK(small.id("a") == Vocabulary::kUnk);

    const auto tied = Vocabulary::build({{"z", "y", "x"}}, 100);
    CHECK(tied.id("x") < tied.id("y"));
    CHECK(Vocabulary::build({{"a", "a", "b"}}, 100) == v);
    CHECK(Vocabulary::from_tokens(v.non_reserved()) == v);
}
