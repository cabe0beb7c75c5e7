// SPDX-License-Identifier: Apache-2.0
//
// iwaqg: prepare, train, generate, evaluate, sweep, ablate.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "iwaqg/commands.hpp"

namespace {

using namespace iwaqg;

void add_common(CLI::App* cmd, CommonOptions& o, std::optional<std::uint64_t>& seed) {
    cmd->add_option("--seed", seed, "Run seed (overrides the config file)");
    cmd->add_option("--config", o.config, "INI config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "Output directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interrogative-word-aware question generation experiments"};
    app.require_subcommand(0, 1);
    std::optional<std::string> print_config;
    app.add_option("--print-config", print_config,
                   "Print the effective configuration (defaults, or the given INI file) and exit")
        ->expected(0, 1)
        ->default_str("");

    PrepareOptions prepare;
    std::optional<std::uint64_t> prepare_seed;
    auto* prep = app.add_subcommand("prepare", "Ingest, balance and tabulate a JSONL corpus");
    add_common(prep, prepare, prepare_seed);
    prep->add_option("--corpus", prepare.corpus, "Training corpus (JSONL)")->required()->check(CLI::ExistingFile);
    prep->add_option("--eval-corpus", prepare.eval_corpus, "Evaluation corpus split into dev/test")
        ->check(CLI::ExistingFile);
    prep->add_option("--cap", prepare.cap, "Per-class cap for the balanced classifier set");

    TrainOptions train;
    std::optional<std::uint64_t> train_seed;
    std::string kind = "qg";
    auto* tr = app.add_subcommand("train", "Train the classifier or the question generator");
    add_common(tr, train, train_seed);
    tr->add_option("--kind", kind, "classifier or qg")->check(CLI::IsMember({"classifier", "qg"}));
    tr->add_option("--data", train.data, "Training data (JSONL)")->required()->check(CLI::ExistingFile);
    tr->add_option("--vocab", train.vocab, "Vocabulary file from prepare")->check(CLI::ExistingFile);

    GenerateOptions gen;
    std::optional<std::uint64_t> gen_seed;
    auto* ge = app.add_subcommand("generate", "Generate questions and dump them with attention");
    add_common(ge, gen, gen_seed);
    ge->add_option("--qg", gen.qg, "QG checkpoint")->required()->check(CLI::ExistingFile);
    ge->add_option("--data", gen.data, "Examples (JSONL)")->required()->check(CLI::ExistingFile);
    ge->add_option("--classifier", gen.classifier, "Classifier checkpoint")->check(CLI::ExistingFile);
    ge->add_option("--oracle", gen.oracle_accuracy, "Oracle classifier accuracy in [0, 1]")
        ->check(CLI::Range(0.0, 1.0));
    ge->add_option("--confusion", gen.confusion, "Confusion matrix CSV for oracle errors")->check(CLI::ExistingFile);
    ge->add_flag("--no-insert", gen.no_insert, "Baseline: insert no interrogative word");
    ge->add_option("--vocab", gen.vocab, "Vocabulary file the checkpoint must match")->check(CLI::ExistingFile);

    EvaluateOptions eval;
    std::optional<std::uint64_t> eval_seed;
    auto* ev = app.add_subcommand("evaluate", "Score a generation dump");
    add_common(ev, eval, eval_seed);
    ev->add_option("--dump", eval.dump, "generations.jsonl")->required()->check(CLI::ExistingFile);

    SweepOptions sweep;
    std::optional<std::uint64_t> sweep_seed;
    auto* sw = app.add_subcommand("sweep", "Oracle accuracy sweep");
    add_common(sw, sweep, sweep_seed);
    sw->add_option("--qg", sweep.qg, "QG checkpoint")->required()->check(CLI::ExistingFile);
    sw->add_option("--data", sweep.data, "Examples (JSONL)")->required()->check(CLI::ExistingFile);
    sw->add_option("--grid", sweep.grid, "Accuracy levels")->delimiter(',');
    sw->add_option("--seeds", sweep.seeds, "Seeds per accuracy level");

    AblateOptions ablate;
    std::optional<std::uint64_t> ablate_seed;
    auto* ab = app.add_subcommand("ablate", "Classifier ablation table");
    add_common(ab, ablate, ablate_seed);
    ab->add_option("--data", ablate.data, "Balanced training data (JSONL)")->required()->check(CLI::ExistingFile);
    ab->add_option("--test", ablate.test, "Test data (JSONL)")->required()->check(CLI::ExistingFile);
    ab->add_option("--vocab", ablate.vocab, "Vocabulary file")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (print_config) {
            const RunConfig config = print_config->empty() ? RunConfig{} : load_run_config(*print_config);
            std::cout << to_ini(config);
            return 0;
        }
        if (*prep) {
            prepare.seed = prepare_seed;
            cmd_prepare(prepare);
        } else if (*tr) {
            train.seed = train_seed;
            train.kind = kind == "classifier" ? ModelKind::Classifier : ModelKind::QG;
            cmd_train(train);
        } else if (*ge) {
            gen.seed = gen_seed;
            cmd_generate(gen);
        } else if (*ev) {
            eval.seed = eval_seed;
            std::cout << cmd_evaluate(eval);
        } else if (*sw) {
            sweep.seed = sweep_seed;
            cmd_sweep(sweep);
        } else if (*ab) {
            ablate.seed = ablate_seed;
            std::cout << cmd_ablate(ablate);
        } else {
            std::cout << app.help();
            return 2;
        }
    } catch (const IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& id : e.ids()) {
            std::cerr << "  bad record: " << id << "\n";
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
