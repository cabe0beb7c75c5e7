// SPDX-License-Identifier: Apache-2.0
//
// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "iwaqg/checkpoint.hpp"
#include "iwaqg/classifier.hpp"
#include "iwaqg/commands.hpp"
#include "iwaqg/config.hpp"
#include "iwaqg/dataset.hpp"
#include "iwaqg/io.hpp"
#include "iwaqg/metrics.hpp"
#include "iwaqg/qg_model.hpp"
#include "oracles.hpp"

using namespace iwaqg;
using ad::Tape;
using ad::Var;

namespace {

const fs::path kSource = IWAQG_SOURCE_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("iwaqg-acceptance-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
    return out;
}

// ---------------------------------------------------------------------------
// Gradient suite

Var probe(Tape& tape, Var x, Rng& rng) {
    return ad::sum(ad::mul(x, tape.constant(oracle::random_tensor(x.shape(), rng))));
}

using OpCheck = std::function<oracle::GradReport(Rng&)>;

std::vector<std::pair<std::string, OpCheck>> op_checks() {
    using oracle::check_gradients;
    using oracle::random_tensor;
    std::vector<std::pair<std::string, OpCheck>> ops;
    auto unary = [&](std::string name, std::function<Var(Var)> f, Shape shape) {
        ops.emplace_back(name, [f, shape](Rng& rng) {
            Tensor x = random_tensor(shape, rng, 2.0);
            const std::uint64_t w = rng.below(1u << 30);
            return check_gradients({{"x", &x}}, [&](Tape& t) {
                Rng wr(w);
                return probe(t, f(t.param(x)), wr);
            });
        });
    };
    auto binary = [&](std::string name, std::function<Var(Var, Var)> f, Shape sa, Shape sb) {
        ops.emplace_back(name, [f, sa, sb](Rng& rng) {
            Tensor a = random_tensor(sa, rng);
            Tensor b = random_tensor(sb, rng);
            const std::uint64_t w = rng.below(1u << 30);
            return check_gradients({{"a", &a}, {"b", &b}}, [&](Tape& t) {
                Rng wr(w);
                return probe(t, f(t.param(a), t.param(b)), wr);
            });
        });
    };
    binary("matmul", [](Var a, Var b) { return ad::matmul(a, b); }, {3, 4}, {4, 2});
    binary("matvec", [](Var a, Var b) { return ad::matmul(a, b); }, {3, 4}, {4});
    binary("add", [](Var a, Var b) { return ad::add(a, b); }, {5}, {5});
    binary("sub", [](Var a, Var b) { return ad::sub(a, b); }, {2, 3}, {2, 3});
    binary("mul", [](Var a, Var b) { return ad::mul(a, b); }, {5}, {5});
    binary("scalar_mul", [](Var a, Var b) { return ad::mul(a, b); }, {1}, {4});
    binary("add_bias", [](Var a, Var b) { return ad::add_bias(a, b); }, {3, 4}, {4});
    binary("concat0", [](Var a, Var b) { return ad::concat({a, b}, 0); }, {2, 3}, {1, 3});
    binary("concat1", [](Var a, Var b) { return ad::concat({a, b}, 1); }, {2, 3}, {2, 2});
    binary("stack_rows", [](Var a, Var b) {
        const std::vector<Var> rows = {ad::row(a, 1), b, ad::row(a, 0)};
        return ad::stack_rows(rows);
    }, {2, 3}, {3});
    unary("sigmoid", [](Var x) { return ad::sigmoid(x); }, {6});
    unary("tanh", [](Var x) { return ad::tanh(x); }, {6});
    unary("relu", [](Var x) { return ad::relu(x); }, {6});
    unary("scale", [](Var x) { return ad::scale(x, -1.7); }, {6});
    unary("add_scalar", [](Var x) { return ad::add_scalar(x, 0.3); }, {6});
    unary("one_minus", [](Var x) { return ad::one_minus(x); }, {6});
    unary("transpose", [](Var x) { return ad::transpose(x); }, {2, 5});
    unary("softmax", [](Var x) { return ad::softmax(x, 0); }, {7});
    unary("softmax_rows", [](Var x) { return ad::softmax(x, 1); }, {3, 4});
    unary("softmax_cols", [](Var x) { return ad::softmax(x, 0); }, {3, 4});
    unary("slice", [](Var x) { return ad::slice(x, 2, 5); }, {7});
    unary("row", [](Var x) { return ad::row(x, 1); }, {3, 4});
    unary("mean_rows", [](Var x) { return ad::mean_rows(x, 1, 3); }, {4, 3});
    unary("sum", [](Var x) { return ad::sum(x); }, {5});
    unary("lookup", [](Var x) {
        const std::vector<std::size_t> ids = {2, 0, 2, 3};
        return ad::lookup(x, ids);
    }, {4, 3});
    unary("gather", [](Var x) {
        const std::vector<std::size_t> idx = {4, 1, 1, 0};
        return ad::gather(x, idx);
    }, {5});
    unary("scatter_sum", [](Var x) {
        const std::vector<std::size_t> targets = {0, 2, 2, 1, 0};
        return ad::scatter_sum(x, targets, 4);
    }, {5});
    unary("segment_max", [](Var x) { return ad::segment_max(x, {{0, 3}, {1}, {2, 4, 5}}).values; }, {6});
    ops.emplace_back("cross_entropy", [](Rng& rng) {
        Tensor x = oracle::random_tensor({8}, rng, 2.0);
        const std::size_t gold = rng.below(8);
        return oracle::check_gradients({{"x", &x}},
                                       [&](Tape& t) { return ad::cross_entropy(ad::softmax(t.param(x), 0), gold); });
    });
    return ops;
}

oracle::GradReport full_graph_check(std::uint64_t seed) {
    QGConfig c;
    c.word_dim = 4;
    c.meta_dim = 2;
    c.encoder_hidden = 3;
    c.decoder_hidden = 5;
    c.seed = seed;
    const Vocabulary vocab = Vocabulary::from_tokens({"a", "b", "c", "d", "e", "f"});
    QGModel model = QGModel::initialize(c, vocab);
    Rng rng(seed ^ 0xfeed);
    const auto src = oracle::random_source(rng, vocab, 6);
    std::vector<std::size_t> targets;
    for (int t = 0; t < 3; ++t) {
        targets.push_back(rng.below(2) == 0 ? src.ids[rng.below(6)] : rng.below(vocab.size()));
    }
    targets.push_back(Vocabulary::kEos);
    std::vector<std::pair<std::string, Tensor*>> tensors;
    for (std::size_t i = 0; i < model.params().size(); ++i) {
        tensors.emplace_back(model.params().name(i), &model.params().tensor(i));
    }
    return oracle::check_gradients(tensors, [&](Tape& t) { return sequence_loss(t, model, src, targets); });
}

Outcome gradient_suite() {
    const auto start = Clock::now();
    const auto ops = op_checks();
    double worst = 0.0;
    std::string where;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        for (const auto& [name, check] : ops) {
            const auto r = check(rng);
            if (r.max_rel_error > worst) {
                worst = r.max_rel_error;
                where = fmt::format("{} (seed {})", name, seed);
            }
        }
        const auto r = full_graph_check(seed);
        if (r.max_rel_error > worst) {
            worst = r.max_rel_error;
            where = fmt::format("encode-decode-loss:{} (seed {})", r.worst, seed);
        }
    }
    const double elapsed = seconds_since(start);
    return {worst < 1e-4 && elapsed < 60.0,
            fmt::format("{} ops + full graph x 100 seeds, max rel err {:.3e} at {}, {:.1f} s (limits 1e-4, 60 s)",
                        ops.size(), worst, where, elapsed)};
}

// ---------------------------------------------------------------------------
// Maxout-pointer oracle

Outcome maxout_oracle() {
    double worst = 0.0;
    double worst_mass = 0.0;
    std::size_t steps = 0;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        Rng rng(seed);
        // Vocabulary of 14 reserved + up to 6 words: at most 20 ids.
        std::vector<std::string> extra;
        for (std::size_t k = 0, n = 1 + rng.below(6); k < n; ++k) extra.push_back(fmt::format("w{}", k));
        const Vocabulary vocab = Vocabulary::from_tokens(extra);
        QGConfig c;
        c.word_dim = 4;
        c.meta_dim = 2;
        c.encoder_hidden = 3;
        c.decoder_hidden = 5;
        c.seed = seed;
        QGModel model = QGModel::initialize(c, vocab);
        for (auto& v : model.params().get("attention.W").values()) v *= 1.0 + 10.0 * rng.uniform();
        const auto src = oracle::random_source(rng, vocab, 1 + rng.below(10));
        Tape tape;
        const auto enc = encode(tape, model, src);
        Var h = enc.final_state;
        Var cell = initial_cell(tape, model);
        std::size_t prev = Vocabulary::kSos;
        for (int t = 0; t < 3; ++t) {
            const auto step = decode_step(tape, model, enc, prev, h, cell);
            const auto& dist = step.final_dist.value();
            const auto gen = step.generate_scores.value().values();
            const auto raw = step.raw_attention.value().values();
            const auto expected = oracle::brute_final_dist({gen.begin(), gen.end()}, {raw.begin(), raw.end()}, src);
            double mass = 0.0;
            for (std::size_t w = 0; w < expected.size(); ++w) {
                worst = std::max(worst, std::abs(dist[w] - expected[w]));
                mass += dist[w];
            }
            worst = dist.size() == expected.size() ? worst : 1.0;
            worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
            ++steps;
            h = step.h;
            cell = step.c;
            prev = src.ids[rng.below(src.size())];
        }
    }
    return {worst <= 1e-9 && worst_mass <= 1e-9,
            fmt::format("1000 seeds, {} decode steps, max |p - brute| {:.2e}, max |sum - 1| {:.2e} (limit 1e-9)", steps,
                        worst, worst_mass)};
}

// ---------------------------------------------------------------------------
// Overfit reproduction

Outcome overfit_reproduction() {
    const auto start = Clock::now();
    const RunConfig config = load_run_config(kSource / "configs" / "overfit.ini");
    const auto data = load_examples(kSource / "data" / "overfit10.jsonl");
    const auto vocab = build_qg_vocab(data, config.qg.vocab_max_size);
    auto result = train_qg(data, config.qg, vocab);
    std::size_t exact = 0;
    for (const auto& ex : data) {
        exact += generate(ex, ex.iw_class, result.model).tokens == ex.question ? 1 : 0;
    }
    const double loss = result.log.back().token_loss;
    const double elapsed = seconds_since(start);
    return {loss < 0.1 && exact == data.size() && elapsed < 300.0,
            fmt::format("final per-token loss {:.4f} after {} epochs (limit 0.1), exact decodes {}/{}, {:.1f} s "
                        "(limit 300 s)",
                        loss, result.log.back().epoch, exact, data.size(), elapsed)};
}

// ---------------------------------------------------------------------------
// Oracle calibration

Outcome oracle_calibration() {
    const std::size_t n = 100000;
    bool ok = true;
    std::string detail;
    for (double a : {0.6, 0.9}) {
        Rng rng(static_cast<std::uint64_t>(a * 1000));
        std::size_t gold = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto g = iw_class_from_code(i % kNumIWClasses);
            gold += oracle_classifier(g, a, rng) == g ? 1 : 0;
        }
        const double rate = static_cast<double>(gold) / static_cast<double>(n);
        const double sigma = std::sqrt(a * (1.0 - a) / static_cast<double>(n));
        const double z = (rate - a) / sigma;
        ok = ok && std::abs(z) <= 4.0;
        detail += fmt::format("{}a={} rate={:.5f} ({:+.2f} sigma)", detail.empty() ? "" : "; ", a, rate, z);
    }
    return {ok, detail + " over 100k draws each (limit 4 sigma)"};
}

// ---------------------------------------------------------------------------
// Sweep monotonicity

Outcome sweep_monotonicity() {
    const auto dir = scratch("sweep");
    const fs::path data = kSource / "data" / "sweep50.jsonl";
    TrainOptions t;
    t.kind = ModelKind::QG;
    t.data = data;
    t.config = kSource / "configs" / "synthetic.ini";
    t.out = dir / "qg";
    cmd_train(t);

    SweepOptions s;
    s.qg = t.out / "model.ckpt";
    s.data = data;
    s.config = t.config;
    s.grid = std::vector<double>{0.6, 0.7, 0.8, 0.9, 1.0};
    s.seeds = 10;
    s.out = dir / "sweep";
    cmd_sweep(s);

    std::istringstream in(read_file(s.out / "sweep_mean.csv"));
    std::string line;
    std::getline(in, line);
    const auto header = split_csv(line);
    const auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
    };
    std::vector<double> acc, bleu4, recall;
    while (std::getline(in, line)) {
        const auto cells = split_csv(line);
        acc.push_back(std::stod(cells[col("accuracy")]));
        bleu4.push_back(std::stod(cells[col("bleu4")]));
        recall.push_back(std::stod(cells[col("total_iw_recall")]));
    }
    bool monotone = acc.size() == 5;
    for (std::size_t i = 1; i < acc.size(); ++i) {
        monotone = monotone && bleu4[i] >= bleu4[i - 1] && recall[i] >= recall[i - 1];
    }
    const bool top = !recall.empty() && recall.back() >= 0.99;
    std::string table;
    for (std::size_t i = 0; i < acc.size(); ++i) {
        table += fmt::format("{}{}: bleu4 {:.3f} recall {:.3f}", i ? ", " : "", format_accuracy(acc[i]), bleu4[i],
                             recall[i]);
    }
    return {monotone && top, fmt::format("50 examples, 10 seeds; {} (non-decreasing required, recall@1.0 >= 0.99)", table)};
}

// ---------------------------------------------------------------------------
// Pipeline vs baseline

Outcome pipeline_vs_baseline() {
    const auto start = Clock::now();
    const RunConfig config = load_run_config(kSource / "configs" / "synthetic.ini");
    const auto train = load_examples(kSource / "data" / "synthetic_train.jsonl");
    const auto heldout = load_examples(kSource / "data" / "synthetic_heldout.jsonl");

    std::vector<std::vector<std::string>> passages;
    for (const auto& ex : train) passages.push_back(ex.passage);
    const auto cls_vocab = Vocabulary::build(passages, config.classifier.vocab_max_size);
    auto classifier = train_classifier(train, config.classifier, cls_vocab).model;
    const double cls_acc = eval_classifier(heldout, classifier).accuracy;

    const auto vocab = build_qg_vocab(train, config.qg.vocab_max_size);
    auto qg = train_qg(train, config.qg, vocab).model;
    QGConfig base_config = config.qg;
    base_config.insert_interrogative = false;
    auto baseline = train_qg(train, base_config, vocab).model;

    std::vector<Sentence> gold, pipeline, base;
    for (const auto& ex : heldout) {
        gold.push_back(ex.question);
        pipeline.push_back(pipeline_generate(ex, classifier, qg).generation.tokens);
        base.push_back(generate(ex, IWClass::Others, baseline).tokens);
    }
    const double r_pipe = iw_recall_precision(pipeline, gold).total_recall;
    const double r_base = iw_recall_precision(base, gold).total_recall;
    return {r_pipe > r_base,
            fmt::format("held-out synthetic ({} examples): pipeline IW recall {:.3f} vs no-insertion baseline {:.3f} "
                        "(classifier accuracy {:.3f}), {:.0f} s",
                        heldout.size(), r_pipe, r_base, cls_acc, seconds_since(start))};
}

// ---------------------------------------------------------------------------
// Metric oracles

Sentence random_sentence(Rng& rng) {
    static const std::vector<std::string> pool = {"the", "cat", "cats", "sat", "sits", "sitting",
                                                  "on",  "mat", "mats", "a",   "who",  "?"};
    Sentence s(rng.below(9));
    for (auto& w : s) w = pool[rng.below(pool.size())];
    return s;
}

Outcome metric_oracles() {
    Rng rng(2024);
    std::size_t bleu_bad = 0, lcs_bad = 0, meteor_bad = 0;
    for (int i = 0; i < 500; ++i) {
        const auto c = random_sentence(rng);
        const auto r = random_sentence(rng);
        const auto stats = bleu_pair_stats(c, r);
        for (std::size_t n = 1; n <= 4; ++n) {
            bleu_bad += stats.clipped[n - 1] != oracle::brute_clipped(c, r, n) ? 1 : 0;
        }
        lcs_bad += lcs_length(c, r) != oracle::brute_lcs(c, r) ? 1 : 0;
        const auto got = meteor_align(c, r);
        const auto want = oracle::brute_meteor(c, r, stem);
        meteor_bad += (got.matches != want.matches || got.chunks != want.chunks) ? 1 : 0;
    }
    bool identity = true;
    for (int k = 0; k < 20; ++k) {
        std::vector<Sentence> corpus;
        for (int i = 0; i < 10; ++i) {
            auto s = random_sentence(rng);
            s.insert(s.begin(), {"who", "is", "on", "the", "mat"});
            corpus.push_back(s);
        }
        const auto rep = evaluate_corpus(corpus, corpus);
        for (double b : rep.bleu) identity = identity && std::abs(b - 1.0) < 1e-12;
        identity = identity && rep.rouge_l == 1.0 && rep.meteor_ex == 1.0 && rep.iw.total_recall == 1.0;
    }
    return {bleu_bad == 0 && lcs_bad == 0 && meteor_bad == 0 && identity,
            fmt::format("500 random pairs (<= 8 tokens): BLEU clipped mismatches {}, LCS mismatches {}, METEOR-ex "
                        "alignment mismatches {}; identity corpora all 1.0: {}",
                        bleu_bad, lcs_bad, meteor_bad, identity ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// Downsampling

Outcome downsampling() {
    Rng rng(77);
    std::size_t violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<IWClass> labels(rng.below(2000));
        const double skew = rng.uniform();
        for (auto& l : labels) {
            l = iw_class_from_code(rng.uniform() < skew ? 0 : rng.below(kNumIWClasses));
        }
        const std::size_t cap = 1 + rng.below(400);
        const auto before = count_classes(labels);
        std::vector<IWClass> kept;
        for (auto i : downsample_indices(labels, cap, trial)) kept.push_back(labels[i]);
        const auto after = count_classes(kept);
        for (std::size_t c = 0; c < kNumIWClasses; ++c) {
            violations += after[c] != std::min(before[c], cap) ? 1 : 0;
        }
    }

    // Label multiset with the published per-class counts.
    const ClassCounts original = {50385, 6111, 3731, 5437, 9162, 1224, 9408, 9408};
    const ClassCounts expected = {4000, 4000, 3731, 4000, 4000, 1224, 4000, 4000};
    std::vector<IWClass> labels;
    for (std::size_t c = 0; c < kNumIWClasses; ++c) labels.insert(labels.end(), original[c], iw_class_from_code(c));
    std::vector<IWClass> kept;
    for (auto i : downsample_indices(labels, 4000, 1)) kept.push_back(labels[i]);
    const bool table_ok = count_classes(kept) == expected;

    std::string real = "real train file not provided (set SQUAD_TRAIN_JSONL to check it)";
    bool real_ok = true;
    if (const char* path = std::getenv("SQUAD_TRAIN_JSONL"); path != nullptr && *path != '\0') {
        const auto dir = scratch("squad");
        PrepareOptions p;
        p.corpus = path;
        p.cap = 4000;
        p.out = dir;
        cmd_prepare(p);
        std::istringstream in(read_file(dir / "class_stats.csv"));
        std::string line;
        std::getline(in, line);
        ClassCounts right{};
        for (std::size_t c = 0; c < kNumIWClasses && std::getline(in, line); ++c) {
            right[c] = std::stoul(split_csv(line).back());
        }
        real_ok = right == expected;
        real = fmt::format("real train file right column {}", real_ok ? "matches" : "DIFFERS");
    }
    return {violations == 0 && table_ok && real_ok,
            fmt::format("200 random corpora: {} count violations; published class counts at cap 4000 reproduce the "
                        "balanced column: {}; {}",
                        violations, table_ok ? "yes" : "no", real)};
}

// ---------------------------------------------------------------------------
// Determinism

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::string content = read_file(entry.path());
        const std::string rel = fs::relative(entry.path(), root).generic_string();
        if (entry.path().filename() == "manifest.json") {
            auto j = nlohmann::json::parse(content);
            j.erase("created_utc");
            content = j.dump();
            // Paths inside the manifest name the run directory itself.
            for (std::size_t pos; (pos = content.find(root.generic_string())) != std::string::npos;) {
                content.replace(pos, root.generic_string().size(), "<run>");
            }
        }
        files[rel] = std::move(content);
    }
    return files;
}

void run_all_commands(const fs::path& root) {
    const fs::path cls_ini = root / "classifier.ini";
    write_file_atomic(cls_ini, "[classifier]\nepochs = 1\nembed_dim = 8\nencoder_hidden = 8\n");

    PrepareOptions p;
    p.corpus = kSource / "data" / "synthetic_test.jsonl";
    p.eval_corpus = kSource / "data" / "sweep50.jsonl";
    p.cap = 5;
    p.out = root / "prepare";
    cmd_prepare(p);

    TrainOptions tq;
    tq.kind = ModelKind::QG;
    tq.data = kSource / "data" / "overfit10.jsonl";
    tq.config = kSource / "configs" / "overfit.ini";
    tq.out = root / "train-qg";
    cmd_train(tq);

    TrainOptions tc;
    tc.kind = ModelKind::Classifier;
    tc.data = p.out / "classifier_train.jsonl";
    tc.config = cls_ini;
    tc.out = root / "train-cls";
    cmd_train(tc);

    GenerateOptions go;
    go.qg = tq.out / "model.ckpt";
    go.data = kSource / "data" / "overfit10.jsonl";
    go.oracle_accuracy = 0.738;
    go.out = root / "gen-oracle";
    cmd_generate(go);

    GenerateOptions gm = go;
    gm.oracle_accuracy.reset();
    gm.classifier = tc.out / "model.ckpt";
    gm.out = root / "gen-model";
    cmd_generate(gm);

    EvaluateOptions e;
    e.dump = go.out / "generations.jsonl";
    e.out = root / "eval";
    cmd_evaluate(e);

    SweepOptions s;
    s.qg = go.qg;
    s.data = go.data;
    s.grid = std::vector<double>{0.6, 1.0};
    s.seeds = 2;
    s.out = root / "sweep";
    cmd_sweep(s);
}

Outcome determinism() {
    const auto a = scratch("det-a");
    const auto b = scratch("det-b");
    run_all_commands(a);
    run_all_commands(b);
    const auto sa = snapshot(a);
    const auto sb = snapshot(b);
    std::vector<std::string> differing;
    for (const auto& [name, content] : sa) {
        const auto it = sb.find(name);
        if (it == sb.end() || it->second != content) differing.push_back(name);
    }
    const bool ok = differing.empty() && sa.size() == sb.size();
    return {ok, fmt::format("prepare/train(qg, classifier)/generate(oracle, model)/evaluate/sweep run twice: {} files "
                            "compared, {} differ{}",
                            sa.size(), differing.size(),
                            differing.empty() ? "" : fmt::format(" ({})", fmt::join(differing, ", ")))};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"gradient-suite", gradient_suite},
        {"maxout-pointer-oracle", maxout_oracle},
        {"overfit-reproduction", overfit_reproduction},
        {"oracle-calibration", oracle_calibration},
        {"sweep-monotonicity", sweep_monotonicity},
        {"pipeline-vs-baseline-recall", pipeline_vs_baseline},
        {"metric-oracles", metric_oracles},
        {"downsampling", downsampling},
        {"determinism", determinism},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, fmt::format("threw: {}", e.what())};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failures, criteria.size()) << std::endl;
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
