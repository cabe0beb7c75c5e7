// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/config.hpp"

#include <charconv>
#include <cstdlib>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "iwaqg/io.hpp"

namespace iwaqg {

namespace {

std::uint64_t parse_uint(const std::string& text, const std::string& key) {
    std::uint64_t value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError(fmt::format("{}: expected a non-negative integer, got '{}'", key, text));
    }
    return value;
}

double parse_double(const std::string& text, const std::string& key) {
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) {
        throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, text));
    }
    return value;
}

bool parse_bool(const std::string& text, const std::string& key) {
    if (text == "true" || text == "1") {
        return true;
    }
    if (text == "false" || text == "0") {
        return false;
    }
    throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, text));
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        out.push_back(parse_double(b == std::string::npos ? "" : item.substr(b, e - b + 1), key));
    }
    if (out.empty()) {
        throw ConfigError(fmt::format("{}: expected a comma-separated list", key));
    }
    return out;
}

struct Field {
    const char* section;
    const char* key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

#define IWAQG_UINT(SEC, KEY, MEMBER)                                                                \
    Field {                                                                                         \
        SEC, KEY, [](const RunConfig& c) { return fmt::format("{}", c.MEMBER); },                   \
            [](RunConfig& c, const std::string& v, const std::string& k) {                          \
                c.MEMBER = static_cast<decltype(c.MEMBER)>(parse_uint(v, k));                       \
            }                                                                                       \
    }
#define IWAQG_DOUBLE(SEC, KEY, MEMBER)                                                              \
    Field {                                                                                         \
        SEC, KEY, [](const RunConfig& c) { return fmt::format("{}", c.MEMBER); },                   \
            [](RunConfig& c, const std::string& v, const std::string& k) { c.MEMBER = parse_double(v, k); } \
    }
#define IWAQG_BOOL(SEC, KEY, MEMBER)                                                                \
    Field {                                                                                         \
        SEC, KEY, [](const RunConfig& c) { return std::string(c.MEMBER ? "true" : "false"); },      \
            [](RunConfig& c, const std::string& v, const std::string& k) { c.MEMBER = parse_bool(v, k); } \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        IWAQG_UINT("run", "seed", seed),
        IWAQG_UINT("data", "cap", data.cap),
        IWAQG_DOUBLE("data", "dev_fraction", data.dev_fraction),
        IWAQG_BOOL("classifier", "answer_tagging", classifier.use_answer_tagging),
        IWAQG_BOOL("classifier", "answer_embedding", classifier.use_answer_embedding),
        IWAQG_BOOL("classifier", "entity_type", classifier.use_entity_type),
        IWAQG_UINT("classifier", "embed_dim", classifier.embed_dim),
        IWAQG_UINT("classifier", "encoder_hidden", classifier.encoder_hidden),
        IWAQG_UINT("classifier", "encoder_layers", classifier.encoder_layers),
        IWAQG_UINT("classifier", "entity_embed_dim", classifier.entity_embed_dim),
        IWAQG_UINT("classifier", "num_classes", classifier.num_classes),
        IWAQG_UINT("classifier", "epochs", classifier.epochs),
        IWAQG_UINT("classifier", "batch_size", classifier.batch_size),
        IWAQG_DOUBLE("classifier", "lr", classifier.lr),
        IWAQG_DOUBLE("classifier", "weight_decay", classifier.weight_decay),
        IWAQG_DOUBLE("classifier", "max_grad_norm", classifier.max_grad_norm),
        IWAQG_DOUBLE("classifier", "dev_fraction", classifier.dev_fraction),
        IWAQG_UINT("classifier", "vocab_max_size", classifier.vocab_max_size),
        IWAQG_UINT("qg", "word_dim", qg.word_dim),
        IWAQG_UINT("qg", "meta_dim", qg.meta_dim),
        IWAQG_UINT("qg", "encoder_hidden", qg.encoder_hidden),
        IWAQG_UINT("qg", "decoder_hidden", qg.decoder_hidden),
        IWAQG_UINT("qg", "epochs", qg.epochs),
        IWAQG_UINT("qg", "batch_size", qg.batch_size),
        IWAQG_DOUBLE("qg", "lr", qg.lr),
        IWAQG_DOUBLE("qg", "weight_decay", qg.weight_decay),
        IWAQG_DOUBLE("qg", "max_grad_norm", qg.max_grad_norm),
        IWAQG_UINT("qg", "max_len", qg.max_len),
        IWAQG_UINT("qg", "vocab_max_size", qg.vocab_max_size),
        IWAQG_DOUBLE("qg", "target_loss", qg.target_loss),
        IWAQG_BOOL("qg", "insert_interrogative", qg.insert_interrogative),
        Field{"sweep", "grid", [](const RunConfig& c) { return fmt::format("{}", fmt::join(c.sweep.grid, ", ")); },
              [](RunConfig& c, const std::string& v, const std::string& k) { c.sweep.grid = parse_list(v, k); }},
        IWAQG_UINT("sweep", "seeds", sweep.seeds),
    };
    return table;
}

#undef IWAQG_UINT
#undef IWAQG_DOUBLE
#undef IWAQG_BOOL

}  // namespace

void RunConfig::set_seed(std::uint64_t value) {
    seed = value;
    classifier.seed = value;
    qg.seed = value;
}

void RunConfig::validate() const {
    if (data.cap == 0) {
        throw ConfigError("data.cap must be positive");
    }
    if (data.dev_fraction < 0.0 || data.dev_fraction > 1.0) {
        throw ConfigError("data.dev_fraction must lie in [0, 1]");
    }
    for (double a : sweep.grid) {
        if (!(a >= 0.0 && a <= 1.0)) {
            throw ConfigError(fmt::format("sweep.grid value {} is outside [0, 1]", a));
        }
    }
    if (sweep.seeds == 0) {
        throw ConfigError("sweep.seeds must be positive");
    }
    try {
        classifier.validate();
        qg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

RunConfig parse_run_config(std::string_view ini_text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(ini_text)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
    }
    RunConfig config;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError(fmt::format("config key '{}' must sit inside a section", section));
        }
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            bool known = false;
            for (const auto& f : fields()) {
                if (section == f.section && key == f.key) {
                    f.set(config, value.get_value<std::string>(), full);
                    known = true;
                    break;
                }
            }
            if (!known) {
                throw ConfigError(fmt::format("unknown config key '{}'", full));
            }
        }
    }
    // The run seed also seeds both models.
    config.classifier.seed = config.seed;
    config.qg.seed = config.seed;
    config.validate();
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_file(path)); }

std::string to_ini(const RunConfig& config) {
    std::string out;
    std::string current;
    for (const auto& f : fields()) {
        if (current != f.section) {
            current = f.section;
            out += fmt::format("{}[{}]\n", out.empty() ? "" : "\n", current);
        }
        out += fmt::format("{} = {}\n", f.key, f.get(config));
    }
    return out;
}

nlohmann::json to_json(const RunConfig& config) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& f : fields()) {
        out[f.section][f.key] = f.get(config);
    }
    out["classifier"]["seed"] = config.classifier.seed;
    out["qg"]["seed"] = config.qg.seed;
    return out;
}

}  // namespace iwaqg
