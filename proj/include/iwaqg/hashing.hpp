// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace iwaqg {

std::string sha1_hex(std::string_view data);
// SHA-1 over "blob <len>\0" + data, the same id git gives the file contents.
std::string git_blob_hash(std::string_view data);
std::string file_hash(const std::filesystem::path& path);

}  // namespace iwaqg
