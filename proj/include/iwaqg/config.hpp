// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: one INI file with [run], [data], [classifier], [qg] and
// [sweep] sections. Keys that are absent keep their defaults; unknown keys
// and malformed values are errors.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "iwaqg/classifier.hpp"
#include "iwaqg/qg_model.hpp"

namespace iwaqg {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DataConfig {
    std::size_t cap = 4000;
    // Share of an evaluation corpus assigned to dev by prepare; the rest is test.
    double dev_fraction = 0.5;
};

struct SweepConfig {
    std::vector<double> grid = {0.6, 0.7, 0.738, 0.8, 0.9, 1.0};
    std::size_t seeds = 5;
};

struct RunConfig {
    std::uint64_t seed = 1;
    DataConfig data;
    ClassifierConfig classifier;
    QGConfig qg;
    SweepConfig sweep;

    // Sets the run seed and the seeds of both models.
    void set_seed(std::uint64_t value);
    void validate() const;
};

RunConfig parse_run_config(std::string_view ini_text);
RunConfig load_run_config(const std::filesystem::path& path);
// Every key with its current value; parse_run_config(to_ini(c)) == c.
std::string to_ini(const RunConfig& config);
nlohmann::json to_json(const RunConfig& config);

}  // namespace iwaqg
