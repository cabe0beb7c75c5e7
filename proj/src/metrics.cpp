// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

#include "iwaqg/dataset.hpp"

namespace iwaqg {

namespace {

void check_aligned(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw std::invalid_argument(fmt::format("{}: {} candidates but {} references", what, a, b));
    }
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(const Sentence& s, std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
        ++counts[std::vector<std::string>(s.begin() + static_cast<std::ptrdiff_t>(i),
                                          s.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

}  // namespace

BleuStats bleu_pair_stats(const Sentence& candidate, const Sentence& reference) {
    BleuStats stats;
    stats.candidate_length = candidate.size();
    stats.reference_length = reference.size();
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto cand = ngram_counts(candidate, n);
        const auto ref = ngram_counts(reference, n);
        for (const auto& [gram, count] : cand) {
            auto it = ref.find(gram);
            if (it != ref.end()) {
                stats.clipped[n - 1] += std::min(count, it->second);
            }
        }
        stats.candidate_ngrams[n - 1] = candidate.size() >= n ? candidate.size() - n + 1 : 0;
        stats.reference_ngrams[n - 1] = reference.size() >= n ? reference.size() - n + 1 : 0;
    }
    return stats;
}

BleuStats bleu_corpus_stats(std::span<const Sentence> candidates, std::span<const Sentence> references) {
    check_aligned(candidates.size(), references.size(), "bleu");
    BleuStats total;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const BleuStats s = bleu_pair_stats(candidates[i], references[i]);
        for (std::size_t k = 0; k < 4; ++k) {
            total.clipped[k] += s.clipped[k];
            total.candidate_ngrams[k] += s.candidate_ngrams[k];
            total.reference_ngrams[k] += s.reference_ngrams[k];
        }
        total.candidate_length += s.candidate_length;
        total.reference_length += s.reference_length;
    }
    return total;
}

std::array<double, 4> bleu_from_stats(const BleuStats& stats) {
    std::array<double, 4> out{};
    if (stats.candidate_length == 0) {
        return out;
    }
    const double c = static_cast<double>(stats.candidate_length);
    const double r = static_cast<double>(stats.reference_length);
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    double log_sum = 0.0;
    bool zero = false;
    for (std::size_t k = 0; k < 4; ++k) {
        double p = 0.0;
        if (stats.candidate_ngrams[k] == 0) {
            // No candidate k-grams at all: agreement only if the references
            // have none either.
            p = stats.reference_ngrams[k] == 0 ? 1.0 : 0.0;
        } else {
            p = static_cast<double>(stats.clipped[k]) / static_cast<double>(stats.candidate_ngrams[k]);
        }
        if (p == 0.0) {
            zero = true;
        } else {
            log_sum += std::log(p);
        }
        out[k] = zero ? 0.0 : bp * std::exp(log_sum / static_cast<double>(k + 1));
    }
    return out;
}

std::array<double, 4> bleu(std::span<const Sentence> candidates, std::span<const Sentence> references) {
    return bleu_from_stats(bleu_corpus_stats(candidates, references));
}

std::size_t lcs_length(const Sentence& a, const Sentence& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double rouge_l_pair(const Sentence& candidate, const Sentence& reference) {
    if (candidate.empty() && reference.empty()) {
        return 1.0;
    }
    const std::size_t lcs = lcs_length(candidate, reference);
    if (lcs == 0) {
        return 0.0;
    }
    const double p = static_cast<double>(lcs) / static_cast<double>(candidate.size());
    const double r = static_cast<double>(lcs) / static_cast<double>(reference.size());
    return 2.0 * p * r / (p + r);
}

double rouge_l(std::span<const Sentence> candidates, std::span<const Sentence> references) {
    check_aligned(candidates.size(), references.size(), "rouge_l");
    if (candidates.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        total += rouge_l_pair(candidates[i], references[i]);
    }
    return total / static_cast<double>(candidates.size());
}

std::string stem(const std::string& word) {
    auto ends = [&](std::string_view suffix) {
        return word.size() >= suffix.size() && word.compare(word.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    auto cut = [&](std::size_t n) { return word.substr(0, word.size() - n); };
    if (ends("sses")) {
        return cut(2);
    }
    if (ends("ies") && word.size() > 4) {
        return cut(3) + "y";
    }
    if (ends("ing") && word.size() > 5) {
        return cut(3);
    }
    if (ends("ed") && word.size() > 4) {
        return cut(2);
    }
    if (ends("ly") && word.size() > 4) {
        return cut(2);
    }
    if (ends("es") && word.size() > 4 && (ends("ches") || ends("shes") || ends("xes") || ends("zes"))) {
        return cut(2);
    }
    if (ends("s") && !ends("ss") && !ends("us") && !ends("is") && word.size() > 3) {
        return cut(1);
    }
    return word;
}

namespace {

class AlignmentSearch {
public:
    AlignmentSearch(const Sentence& candidate, const Sentence& reference)
        : candidate_(candidate), reference_(reference), assigned_(candidate.size()), used_(reference.size(), false) {
        std::map<std::string, std::size_t> cluster_ids;
        auto cluster_of = [&](const std::string& w) {
            return cluster_ids.try_emplace(stem(w), cluster_ids.size()).first->second;
        };
        for (const auto& w : candidate) {
            cand_cluster_.push_back(cluster_of(w));
        }
        for (const auto& w : reference) {
            ref_cluster_.push_back(cluster_of(w));
        }
        std::vector<std::size_t> cand_count(cluster_ids.size(), 0);
        std::vector<std::size_t> ref_count(cluster_ids.size(), 0);
        for (auto k : cand_cluster_) {
            ++cand_count[k];
        }
        for (auto k : ref_cluster_) {
            ++ref_count[k];
        }
        need_.resize(cluster_ids.size());
        left_ = cand_count;
        for (std::size_t k = 0; k < need_.size(); ++k) {
            need_[k] = std::min(cand_count[k], ref_count[k]);
            target_ += need_[k];
        }
    }

    MeteorAlignment run() {
        search(0, std::nullopt, 0, 0);
        MeteorAlignment out;
        out.matches = target_;
        out.chunks = best_chunks_;
        out.ref_of = best_;
        if (target_ == 0) {
            out.chunks = 0;
            out.ref_of.assign(candidate_.size(), std::nullopt);
        }
        return out;
    }

private:
    // prev_ref: reference position of candidate i-1 when it was matched.
    void search(std::size_t i, std::optional<std::size_t> prev_ref, std::size_t chunks, std::size_t exact) {
        if (chunks > best_chunks_ || ++nodes_ > kNodeLimit) {
            return;
        }
        if (i == candidate_.size()) {
            if (chunks < best_chunks_ || exact > best_exact_) {
                best_chunks_ = chunks;
                best_exact_ = exact;
                best_ = assigned_;
            }
            return;
        }
        const std::size_t k = cand_cluster_[i];
        --left_[k];
        if (need_[k] > 0) {
            auto try_ref = [&](std::size_t j) {
                used_[j] = true;
                --need_[k];
                assigned_[i] = j;
                const bool continues = prev_ref && *prev_ref + 1 == j;
                search(i + 1, j, chunks + (continues ? 0 : 1), exact + (candidate_[i] == reference_[j] ? 1 : 0));
                assigned_[i].reset();
                ++need_[k];
                used_[j] = false;
            };
            const std::size_t next = prev_ref ? *prev_ref + 1 : reference_.size();
            if (next < reference_.size() && !used_[next] && ref_cluster_[next] == k) {
                try_ref(next);
            }
            for (std::size_t j = 0; j < reference_.size(); ++j) {
                if (j != next && !used_[j] && ref_cluster_[j] == k) {
                    try_ref(j);
                }
            }
        }
        if (left_[k] >= need_[k]) {
            search(i + 1, std::nullopt, chunks, exact);
        }
        ++left_[k];
    }

    static constexpr std::size_t kNodeLimit = std::size_t{1} << 22;

    const Sentence& candidate_;
    const Sentence& reference_;
    std::vector<std::size_t> cand_cluster_;
    std::vector<std::size_t> ref_cluster_;
    std::vector<std::size_t> need_;
    std::vector<std::size_t> left_;
    std::size_t target_ = 0;
    std::vector<std::optional<std::size_t>> assigned_;
    std::vector<bool> used_;
    std::vector<std::optional<std::size_t>> best_;
    std::size_t best_chunks_ = static_cast<std::size_t>(-1);
    std::size_t best_exact_ = 0;
    std::size_t nodes_ = 0;
};

}  // namespace

MeteorAlignment meteor_align(const Sentence& candidate, const Sentence& reference) {
    return AlignmentSearch(candidate, reference).run();
}

double meteor_score(std::size_t matches, std::size_t chunks, std::size_t candidate_length,
                    std::size_t reference_length) {
    if (matches == 0) {
        return 0.0;
    }
    const double m = static_cast<double>(matches);
    const double p = m / static_cast<double>(candidate_length);
    const double r = m / static_cast<double>(reference_length);
    const double f_mean = 10.0 * p * r / (r + 9.0 * p);
    // A complete single-chunk match is not fragmented at all.
    const bool whole = chunks == 1 && matches == candidate_length && matches == reference_length;
    const double frag = static_cast<double>(chunks) / m;
    const double penalty = whole ? 0.0 : 0.5 * frag * frag * frag;
    return f_mean * (1.0 - penalty);
}

double meteor_pair(const Sentence& candidate, const Sentence& reference) {
    if (candidate.empty() && reference.empty()) {
        return 1.0;
    }
    const MeteorAlignment a = meteor_align(candidate, reference);
    return meteor_score(a.matches, a.chunks, candidate.size(), reference.size());
}

double meteor_ex(std::span<const Sentence> candidates, std::span<const Sentence> references) {
    check_aligned(candidates.size(), references.size(), "meteor_ex");
    if (candidates.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        total += meteor_pair(candidates[i], references[i]);
    }
    return total / static_cast<double>(candidates.size());
}

IWTable iw_recall_precision(std::span<const Sentence> generated, std::span<const Sentence> gold) {
    check_aligned(generated.size(), gold.size(), "iw_recall_precision");
    IWTable table;
    table.size = gold.size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const IWClass g = label_interrogative_class(gold[i]);
        const IWClass p = label_interrogative_class(generated[i]);
        ++table.rows[code(g)].support;
        ++table.rows[code(p)].predicted;
        if (g == p) {
            ++table.rows[code(g)].correct;
            ++correct;
        }
    }
    for (auto& row : table.rows) {
        if (row.support > 0) {
            row.recall = static_cast<double>(row.correct) / static_cast<double>(row.support);
        }
        if (row.predicted > 0) {
            row.precision = static_cast<double>(row.correct) / static_cast<double>(row.predicted);
        }
    }
    table.total_recall = gold.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(gold.size());
    return table;
}

std::string iw_table_text(const IWTable& table) {
    auto pct = [](const std::optional<double>& v) { return v ? fmt::format("{:.2f}%", 100.0 * *v) : std::string("-"); };
    std::string out = fmt::format("{:<8} {:>8} {:>10} {:>10}\n", "Class", "Support", "Recall", "Precision");
    for (auto c : kAllIWClasses) {
        const auto& row = table.rows[code(c)];
        out += fmt::format("{:<8} {:>8} {:>10} {:>10}\n", to_string(c), row.support, pct(row.recall), pct(row.precision));
    }
    out += fmt::format("{:<8} {:>8} {:>10}\n", "Total", table.size, pct(table.total_recall));
    return out;
}

EvalReport evaluate_corpus(std::span<const Sentence> candidates, std::span<const Sentence> references) {
    check_aligned(candidates.size(), references.size(), "evaluate");
    EvalReport report;
    report.bleu = bleu(candidates, references);
    report.rouge_l = rouge_l(candidates, references);
    report.meteor_ex = meteor_ex(candidates, references);
    report.iw = iw_recall_precision(candidates, references);
    report.size = candidates.size();
    return report;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json classes = nlohmann::json::object();
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    for (auto c : kAllIWClasses) {
        const auto& row = report.iw.rows[code(c)];
        classes[std::string(to_string(c))] = {{"support", row.support},
                                              {"predicted", row.predicted},
                                              {"recall", opt(row.recall)},
                                              {"precision", opt(row.precision)}};
    }
    return {{"metric_notes", {{"rouge_l_beta", 1.0}, {"meteor", "METEOR-ex (exact + stem, no synonyms)"}, {"bleu_smoothing", "none"}}},
            {"size", report.size},
            {"bleu", report.bleu},
            {"rouge_l", report.rouge_l},
            {"meteor_ex", report.meteor_ex},
            {"iw_table", classes},
            {"total_iw_recall", report.iw.total_recall}};
}

std::string eval_csv_header() {
    return "run_id,config_hash,size,bleu1,bleu2,bleu3,bleu4,rouge_l,meteor_ex,total_iw_recall";
}

std::string eval_csv_row(const std::string& run_id, const std::string& config_hash, const EvalReport& r) {
    return fmt::format("{},{},{},{},{},{},{},{},{},{}", run_id, config_hash, r.size, r.bleu[0], r.bleu[1], r.bleu[2],
                       r.bleu[3], r.rouge_l, r.meteor_ex, r.iw.total_recall);
}

}  // namespace iwaqg
