#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "verimap/errors.hpp"

namespace verimap {

/// SHA-256 of the given bytes, lowercase hex.
inline std::string sha256_hex(std::string_view data) {
    unsigned char out[EVP_MAX_MD_SIZE];
    unsigned int out_len = 0;
    if (EVP_Digest(data.data(), data.size(), out, &out_len, EVP_sha256(), nullptr) != 1) {
        throw Error("DigestFailure", "EVP_Digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string s;
    s.reserve(2 * out_len);
    for (unsigned int i = 0; i < out_len; ++i) {
        s.push_back(hex[out[i] >> 4]);
        s.push_back(hex[out[i] & 0xf]);
    }
    return s;
}

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("FileNotReadable", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string sha256_file_hex(const std::string& path) {
    return sha256_hex(read_file_bytes(path));
}

}  // namespace verimap
