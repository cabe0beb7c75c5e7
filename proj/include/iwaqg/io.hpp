// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace iwaqg {

std::string read_file(const std::filesystem::path& path);

// Collects every output of a command and publishes them together: all files
// are first written next to their targets under temporary names, then renamed
// into place. Nothing appears at a target path unless every write succeeded.
// Uncommitted batches leave no files behind.
class OutputBatch {
public:
    OutputBatch() = default;
    OutputBatch(const OutputBatch&) = delete;
    OutputBatch& operator=(const OutputBatch&) = delete;
    ~OutputBatch();

    void add(std::filesystem::path path, std::string content);
    void commit();
    bool empty() const { return pending_.empty(); }

private:
    std::vector<std::pair<std::filesystem::path, std::string>> pending_;
    std::vector<std::filesystem::path> temporaries_;
};

// Single-file convenience wrapper around OutputBatch.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace iwaqg
