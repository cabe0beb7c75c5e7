// SPDX-License-Identifier: Apache-2.0

#include "iwaqg/hashing.hpp"

#include <array>
#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "iwaqg/io.hpp"

namespace iwaqg {

std::string sha1_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha1(), nullptr) != 1) {
        throw std::runtime_error("SHA-1 digest failed");
    }
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += fmt::format("{:02x}", digest[i]);
    }
    return out;
}

std::string git_blob_hash(std::string_view data) {
    std::string blob = fmt::format("blob {}", data.size());
    blob.push_back('\0');
    blob.append(data);
    return sha1_hex(blob);
}

std::string file_hash(const std::filesystem::path& path) { return git_blob_hash(read_file(path)); }

}  // namespace iwaqg
