// SPDX-License-Identifier: Apache-2.0
//
// Answer-coded synthetic corpus. Each passage lists five slot phrases; the
// answer is one of them and its lexicon determines the interrogative class,
// so class identity is carried by the answer tokens and the entity label.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "iwaqg/dataset.hpp"
#include "iwaqg/labels.hpp"

namespace iwaqg {

enum class LexiconPool : std::uint8_t { Train, HeldOut };

struct SyntheticOptions {
    std::size_t per_class = 40;
    std::uint64_t seed = 1;
    // Answer and filler words come from this pool; the pools share no words.
    LexiconPool pool = LexiconPool::Train;
    std::size_t slots = 5;
    std::string id_prefix = "syn";
};

// Records in class-major order: per_class records for What, then Which, ...
std::vector<RawRecord> make_synthetic(const SyntheticOptions& options);

}  // namespace iwaqg
