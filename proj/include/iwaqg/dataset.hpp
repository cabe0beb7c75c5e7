// SPDX-License-Identifier: Apache-2.0
//
// SQuAD-style records, their ingestion into token-level examples, gold label
// derivation, answer entity typing and class balancing.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "iwaqg/labels.hpp"

namespace iwaqg {

// One JSON Lines record as it appears on disk.
struct RawRecord {
    std::string id;
    std::string passage;
    // Offset of the answer in the passage, counted in Unicode code points.
    std::size_t answer_start = 0;
    std::string answer_text;
    std::string question;
    std::optional<std::string> entity_type;
};

struct Example {
    RawRecord source;
    std::vector<std::string> passage;
    // Token span [answer_begin, answer_end) into passage.
    std::size_t answer_begin = 0;
    std::size_t answer_end = 0;
    std::vector<std::string> question;
    EntityType entity_type = EntityType::None;
    IWClass iw_class = IWClass::Others;

    const std::string& id() const { return source.id; }
    std::size_t answer_length() const { return answer_end - answer_begin; }
};

// Raised when records cannot be turned into examples; lists every failing id.
class IngestError : public std::runtime_error {
public:
    IngestError(const std::string& message, std::vector<std::string> ids)
        : std::runtime_error(message), ids_(std::move(ids)) {}
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::vector<std::string> ids_;
};

RawRecord record_from_json(const nlohmann::json& j);
// Writes the record, plus derived "iw_class" and resolved "entity_type" when
// an example is supplied.
nlohmann::json record_to_json(const RawRecord& record, const Example* derived = nullptr);

std::vector<RawRecord> parse_jsonl(std::string_view content);
std::vector<RawRecord> read_jsonl(const std::filesystem::path& path);
std::string examples_to_jsonl(std::span<const Example> examples);

Example ingest(const RawRecord& record);
std::vector<Example> ingest_all(std::span<const RawRecord> records);
std::vector<Example> load_examples(const std::filesystem::path& path);

// First token among what/which/where/when/who/whom/whose/why/how decides;
// whom and whose count as who. No match gives Others.
IWClass label_interrogative_class(std::span<const std::string> question);

// Maps spaCy-style labels (PERSON, GPE, DATE, ...) and this project's own
// names onto EntityType. Unknown labels give nullopt.
std::optional<EntityType> map_entity_label(std::string_view label);
// Rule-based fallback when a record has no entity label.
EntityType tag_entity_rule(std::string_view answer_text);
EntityType assign_entity_type(const RawRecord& record);

using ClassCounts = std::array<std::size_t, kNumIWClasses>;

ClassCounts count_classes(std::span<const Example> examples);
ClassCounts count_classes(std::span<const IWClass> labels);

// Per class, keeps a uniform sample of min(count, cap) positions without
// replacement. Returned indices are sorted.
std::vector<std::size_t> downsample_indices(std::span<const IWClass> labels, std::size_t cap, std::uint64_t seed);
std::vector<Example> downsample(std::span<const Example> examples, std::size_t cap, std::uint64_t seed);

// Class / Original / After Downsampling table.
std::string class_stats_table(const ClassCounts& original, const ClassCounts& after);
std::string class_stats_csv(const ClassCounts& original, const ClassCounts& after);

// Seeded shuffle-split: the first part holds round(fraction * n) examples.
std::pair<std::vector<Example>, std::vector<Example>> split_examples(std::span<const Example> examples,
                                                                     double fraction, std::uint64_t seed);

}  // namespace iwaqg
