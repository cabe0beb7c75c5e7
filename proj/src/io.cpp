// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace iwaqg {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

OutputBatch::~OutputBatch() {
    std::error_code ec;
    for (const auto& tmp : temporaries_) {
        std::filesystem::remove(tmp, ec);
    }
}

void OutputBatch::add(std::filesystem::path path, std::string content) {
    pending_.emplace_back(std::move(path), std::move(content));
}

void OutputBatch::commit() {
    for (const auto& [path, content] : pending_) {
        if (path.has_parent_path()) {
            std::filesystem::create_directories(path.parent_path());
        }
        auto tmp = path;
        tmp += ".partial";
        temporaries_.push_back(tmp);
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.close();
        if (!out) {
            throw std::runtime_error("failed to write " + tmp.string());
        }
    }
    for (const auto& [path, content] : pending_) {
        auto tmp = path;
        tmp += ".partial";
        std::filesystem::rename(tmp, path);
    }
    temporaries_.clear();
    pending_.clear();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    OutputBatch batch;
    batch.add(path, content);
    batch.commit();
}

}  // namespace iwaqg
