// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "iwaqg/io.hpp"
#include "iwaqg/rng.hpp"
#include "iwaqg/tokenizer.hpp"

namespace iwaqg {

RawRecord record_from_json(const nlohmann::json& j) {
    RawRecord r;
    r.id = j.at("id").get<std::string>();
    r.passage = j.at("passage").get<std::string>();
    const auto& start = j.at("answer_start");
    if (!start.is_number_integer() || start.get<long long>() < 0) {
        throw std::invalid_argument("answer_start must be a non-negative integer");
    }
    r.answer_start = start.get<std::size_t>();
    r.answer_text = j.at("answer_text").get<std::string>();
    r.question = j.at("question").get<std::string>();
    if (auto it = j.find("entity_type"); it != j.end() && !it->is_null()) {
        r.entity_type = it->get<std::string>();
    }
    return r;
}

nlohmann::json record_to_json(const RawRecord& record, const Example* derived) {
    nlohmann::json j;
    j["id"] = record.id;
    j["passage"] = record.passage;
    j["answer_start"] = record.answer_start;
    j["answer_text"] = record.answer_text;
    j["question"] = record.question;
    if (derived != nullptr) {
        j["entity_type"] = std::string(to_string(derived->entity_type));
        j["iw_class"] = std::string(to_string(derived->iw_class));
    } else if (record.entity_type) {
        j["entity_type"] = *record.entity_type;
    }
    return j;
}

std::vector<RawRecord> parse_jsonl(std::string_view content) {
    std::vector<RawRecord> records;
    std::vector<std::string> bad;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = content.size();
        }
        std::string_view line = content.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            continue;
        }
        try {
            records.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            std::string label = fmt::format("line {}", line_no);
            try {
                auto j = nlohmann::json::parse(line);
                if (j.contains("id") && j["id"].is_string()) {
                    label = j["id"].get<std::string>();
                }
            } catch (...) {
            }
            bad.push_back(label);
        }
    }
    if (!bad.empty()) {
        throw IngestError(fmt::format("malformed records: {}", fmt::join(bad, ", ")), bad);
    }
    return records;
}

std::vector<RawRecord> read_jsonl(const std::filesystem::path& path) { return parse_jsonl(read_file(path)); }

std::string examples_to_jsonl(std::span<const Example> examples) {
    std::string out;
    for (const auto& ex : examples) {
        out += record_to_json(ex.source, &ex).dump();
        out.push_back('\n');
    }
    return out;
}

namespace {

// Byte offset of the code point with the given index, or nullopt past the end.
std::optional<std::size_t> code_point_to_byte(std::string_view s, std::size_t index) {
    std::size_t seen = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if ((static_cast<unsigned char>(s[i]) & 0xC0) == 0x80) {
            continue;
        }
        if (seen == index) {
            return i;
        }
        ++seen;
    }
    if (seen == index) {
        return s.size();
    }
    return std::nullopt;
}

}  // namespace

Example ingest(const RawRecord& record) {
    auto fail = [&](const std::string& why) {
        return IngestError(fmt::format("record '{}': {}", record.id, why), {record.id});
    };
    if (record.answer_text.empty()) {
        throw fail("empty answer_text");
    }
    const auto begin_byte = code_point_to_byte(record.passage, record.answer_start);
    if (!begin_byte) {
        throw fail("answer_start beyond passage end");
    }
    const std::size_t end_byte = *begin_byte + record.answer_text.size();
    if (end_byte > record.passage.size() ||
        std::string_view(record.passage).substr(*begin_byte, record.answer_text.size()) != record.answer_text) {
        throw fail("answer_text does not occur at answer_start");
    }

    Example ex;
    ex.source = record;
    const auto tokens = tokenize_with_offsets(record.passage);
    std::optional<std::size_t> first;
    std::size_t last = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        ex.passage.push_back(tokens[i].text);
        if (tokens[i].end > *begin_byte && tokens[i].begin < end_byte) {
            if (!first) {
                first = i;
            }
            last = i + 1;
        }
    }
    if (!first) {
        throw fail("answer covers no passage token");
    }
    ex.answer_begin = *first;
    ex.answer_end = last;
    const std::vector<std::string> span(ex.passage.begin() + static_cast<std::ptrdiff_t>(ex.answer_begin),
                                        ex.passage.begin() + static_cast<std::ptrdiff_t>(ex.answer_end));
    if (span != tokenize(record.answer_text)) {
        throw fail("answer boundaries split a passage token");
    }
    ex.question = tokenize(record.question);
    ex.iw_class = label_interrogative_class(ex.question);
    if (record.entity_type) {
        auto mapped = map_entity_label(*record.entity_type);
        if (!mapped) {
            throw fail("unknown entity_type '" + *record.entity_type + "'");
        }
        ex.entity_type = *mapped;
    } else {
        ex.entity_type = tag_entity_rule(record.answer_text);
    }
    return ex;
}

std::vector<Example> ingest_all(std::span<const RawRecord> records) {
    std::vector<Example> out;
    std::vector<std::string> bad;
    std::vector<std::string> reasons;
    out.reserve(records.size());
    for (const auto& r : records) {
        try {
            out.push_back(ingest(r));
        } catch (const IngestError& e) {
            bad.push_back(r.id);
            reasons.emplace_back(e.what());
        }
    }
    if (!bad.empty()) {
        throw IngestError(fmt::format("{} record(s) failed ingestion: {}", bad.size(), fmt::join(reasons, "; ")), bad);
    }
    return out;
}

std::vector<Example> load_examples(const std::filesystem::path& path) {
    const auto records = read_jsonl(path);
    return ingest_all(records);
}

IWClass label_interrogative_class(std::span<const std::string> question) {
    for (const auto& tok : question) {
        if (tok == "whom" || tok == "whose") {
            return IWClass::Who;
        }
        if (auto c = parse_iw_class(tok); c && *c != IWClass::Others) {
            return *c;
        }
    }
    return IWClass::Others;
}

namespace {

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (static_cast<unsigned char>(c) < 0x80) {
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    return out;
}

const std::set<std::string, std::less<>>& number_words() {
    static const std::set<std::string, std::less<>> kWords = {
        "zero",    "one",     "two",      "three",    "four",     "five",    "six",    "seven",   "eight",
        "nine",    "ten",     "eleven",   "twelve",   "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
        "eighteen", "nineteen", "twenty", "thirty",   "forty",    "fifty",   "sixty",  "seventy", "eighty",
        "ninety",  "hundred", "thousand", "million",  "billion",  "trillion", "dozen",  "half",    "%",
        "percent", "and",     "-",        "$",        "first",    "second",  "third"};
    return kWords;
}

const std::set<std::string, std::less<>>& date_words() {
    static const std::set<std::string, std::less<>> kWords = {
        "january", "february", "march",   "april",  "may",     "june",     "july",   "august",  "september",
        "october", "november", "december", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
        "sunday",  "century",  "centuries", "decade", "bc",     "ad",       "bce",    "ce",      "spring",
        "summer",  "autumn",   "winter",  "morning", "evening", "night",    "today",  "yesterday"};
    return kWords;
}

const std::set<std::string, std::less<>>& places() {
    static const std::set<std::string, std::less<>> kPlaces = {
        "japan",   "china",     "india",    "france",  "germany",   "italy",   "spain",      "england",
        "britain", "united kingdom", "united states", "america", "canada", "mexico",   "brazil",     "russia",
        "egypt",   "australia", "london",   "paris",   "berlin",    "rome",    "tokyo",      "new york",
        "newcastle", "newport", "europe",   "asia",    "africa",    "california", "texas",   "beijing",
        "moscow",  "madrid",    "vienna",   "warsaw",  "chicago",   "boston",  "scotland",   "ireland",
        "greece",  "portugal",  "poland",   "sweden",  "norway",    "israel",  "iran",       "iraq"};
    return kPlaces;
}

const std::set<std::string, std::less<>>& organisations() {
    static const std::set<std::string, std::less<>> kOrgs = {
        "united nations", "nato",     "un",        "bbc",    "ibm",      "google",   "microsoft",  "apple",
        "nasa",           "fifa",     "unesco",    "congress", "parliament", "senate", "european union", "eu",
        "harvard university", "oxford university", "yale", "mit", "the beatles", "catholic church", "opec"};
    return kOrgs;
}

const std::set<std::string, std::less<>>& first_names() {
    static const std::set<std::string, std::less<>> kNames = {
        "john",   "james",  "mary",   "george", "william", "elizabeth", "charles", "henry",  "thomas",
        "robert", "michael", "david", "richard", "joseph", "edward",    "anne",    "victoria", "frederick",
        "albert", "isaac",  "napoleon", "martin", "peter", "paul",      "louis",   "alexander", "catherine"};
    return kNames;
}

bool numeric_token(const std::string& tok) {
    if (number_words().contains(tok)) {
        return true;
    }
    bool any_digit = false;
    for (char c : tok) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            any_digit = true;
        } else if (c != ',' && c != '.') {
            return false;
        }
    }
    return any_digit;
}

bool decade_token(const std::string& tok) {
    // "1990s"
    return tok.size() == 5 && tok.back() == 's' &&
           std::all_of(tok.begin(), tok.end() - 1, [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

std::optional<EntityType> map_entity_label(std::string_view label) {
    const std::string l = lower_ascii(label);
    if (l.empty() || l == "none") {
        return EntityType::None;
    }
    if (l == "person" || l == "per") {
        return EntityType::Person;
    }
    if (l == "gpe" || l == "loc" || l == "location" || l == "fac" || l == "locationgpe") {
        return EntityType::LocationGpe;
    }
    if (l == "org" || l == "norp") {
        return EntityType::Org;
    }
    if (l == "date" || l == "time" || l == "datetime") {
        return EntityType::DateTime;
    }
    if (l == "cardinal" || l == "quantity" || l == "money" || l == "percent" || l == "ordinal" || l == "numeric") {
        return EntityType::Numeric;
    }
    if (l == "misc" || l == "event" || l == "work_of_art" || l == "law" || l == "language" || l == "product") {
        return EntityType::Misc;
    }
    return std::nullopt;
}

EntityType tag_entity_rule(std::string_view answer_text) {
    const auto tokens = tokenize(answer_text);
    if (tokens.empty()) {
        return EntityType::None;
    }
    const auto connective = [](const std::string& t) {
        return t == "and" || t == "-" || t == "%" || t == "percent" || t == "$";
    };
    if (std::all_of(tokens.begin(), tokens.end(), numeric_token) &&
        !std::all_of(tokens.begin(), tokens.end(), connective)) {
        return EntityType::Numeric;
    }
    if (std::any_of(tokens.begin(), tokens.end(),
                    [](const std::string& t) { return date_words().contains(t) || decade_token(t); })) {
        return EntityType::DateTime;
    }
    const auto first_alpha =
        std::find_if(answer_text.begin(), answer_text.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
    if (first_alpha == answer_text.end()) {
        return EntityType::None;
    }
    // Gazetteer entries are only trusted for capitalised source spans, with
    // a leading article allowed.
    std::vector<std::string> words = tokens;
    std::string_view original = answer_text;
    if (words.size() > 1 && words.front() == "the") {
        words.erase(words.begin());
        original.remove_prefix(std::min(original.size(), original.find_first_of(" \t") + 1));
    }
    const auto cap = std::find_if(original.begin(), original.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
    if (cap == original.end() || !std::isupper(static_cast<unsigned char>(*cap))) {
        return EntityType::None;
    }
    std::string joined;
    for (std::size_t i = 0; i < words.size(); ++i) {
        joined += (i ? " " : "") + words[i];
    }
    if (places().contains(joined)) {
        return EntityType::LocationGpe;
    }
    if (organisations().contains(joined) || organisations().contains("the " + joined)) {
        return EntityType::Org;
    }
    if (words.size() <= 3 && first_names().contains(words.front())) {
        return EntityType::Person;
    }
    return EntityType::None;
}

EntityType assign_entity_type(const RawRecord& record) {
    if (record.entity_type) {
        if (auto mapped = map_entity_label(*record.entity_type)) {
            return *mapped;
        }
    }
    return tag_entity_rule(record.answer_text);
}

ClassCounts count_classes(std::span<const Example> examples) {
    ClassCounts counts{};
    for (const auto& ex : examples) {
        ++counts[code(ex.iw_class)];
    }
    return counts;
}

ClassCounts count_classes(std::span<const IWClass> labels) {
    ClassCounts counts{};
    for (auto c : labels) {
        ++counts[code(c)];
    }
    return counts;
}

std::vector<std::size_t> downsample_indices(std::span<const IWClass> labels, std::size_t cap, std::uint64_t seed) {
    if (cap == 0) {
        throw std::invalid_argument("downsampling cap must be positive");
    }
    std::array<std::vector<std::size_t>, kNumIWClasses> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        by_class[code(labels[i])].push_back(i);
    }
    const Rng root(seed);
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < kNumIWClasses; ++c) {
        auto& pool = by_class[c];
        if (pool.size() > cap) {
            Rng rng = root.split(c);
            // Partial Fisher-Yates: the first cap slots become the sample.
            for (std::size_t i = 0; i < cap; ++i) {
                const std::size_t j = i + rng.below(pool.size() - i);
                std::swap(pool[i], pool[j]);
            }
            pool.resize(cap);
        }
        kept.insert(kept.end(), pool.begin(), pool.end());
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

std::vector<Example> downsample(std::span<const Example> examples, std::size_t cap, std::uint64_t seed) {
    std::vector<IWClass> labels;
    labels.reserve(examples.size());
    for (const auto& ex : examples) {
        labels.push_back(ex.iw_class);
    }
    std::vector<Example> out;
    for (auto i : downsample_indices(labels, cap, seed)) {
        out.push_back(examples[i]);
    }
    return out;
}

namespace {

std::string display_name(IWClass c) {
    std::string s(to_string(c));
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

}  // namespace

std::string class_stats_table(const ClassCounts& original, const ClassCounts& after) {
    std::string out = fmt::format("{:<8} {:>10} {:>20}\n", "Class", "Original", "After Downsampling");
    std::size_t total_before = 0;
    std::size_t total_after = 0;
    for (auto c : kAllIWClasses) {
        out += fmt::format("{:<8} {:>10} {:>20}\n", display_name(c), original[code(c)], after[code(c)]);
        total_before += original[code(c)];
        total_after += after[code(c)];
    }
    out += fmt::format("{:<8} {:>10} {:>20}\n", "Total", total_before, total_after);
    return out;
}

std::string class_stats_csv(const ClassCounts& original, const ClassCounts& after) {
    std::string out = "class,original,after_downsampling\n";
    for (auto c : kAllIWClasses) {
        out += fmt::format("{},{},{}\n", to_string(c), original[code(c)], after[code(c)]);
    }
    return out;
}

std::pair<std::vector<Example>, std::vector<Example>> split_examples(std::span<const Example> examples,
                                                                     double fraction, std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0) {
        throw std::invalid_argument("split fraction must lie in [0, 1]");
    }
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }
    const auto n_first = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(examples.size())));
    std::vector<std::size_t> first(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_first));
    std::vector<std::size_t> second(order.begin() + static_cast<std::ptrdiff_t>(n_first), order.end());
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    std::pair<std::vector<Example>, std::vector<Example>> out;
    for (auto i : first) {
        out.first.push_back(examples[i]);
    }
    for (auto i : second) {
        out.second.push_back(examples[i]);
    }
    return out;
}

}  // namespace iwaqg
