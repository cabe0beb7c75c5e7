// SPDX-License-Identifier: Apache-2.0
//
// Writes an answer-coded synthetic corpus as JSONL.

#include <iostream>

#include <CLI11.hpp>

#include "iwaqg/dataset.hpp"
#include "iwaqg/io.hpp"
#include "iwaqg/synthetic.hpp"

int main(int argc, char** argv) {
    using namespace iwaqg;
    CLI::App app{"Generate an answer-coded synthetic QA corpus"};
    SyntheticOptions options;
    std::string pool = "train";
    std::string out;
    app.add_option("--per-class", options.per_class, "Records per interrogative class");
    app.add_option("--seed", options.seed, "Seed");
    app.add_option("--pool", pool, "Lexicon pool")->check(CLI::IsMember({"train", "held-out"}));
    app.add_option("--id-prefix", options.id_prefix, "Record id prefix");
    app.add_option("--out", out, "Output JSONL path")->required();
    CLI11_PARSE(app, argc, argv);
    options.pool = pool == "train" ? LexiconPool::Train : LexiconPool::HeldOut;

    try {
        std::string content;
        for (const auto& r : make_synthetic(options)) {
            content += record_to_json(r).dump() + "\n";
        }
        write_file_atomic(out, content);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
