#include "mailsig/hash.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace mailsig {

std::array<std::uint8_t, 32> sha256(std::string_view data) {
    std::array<std::uint8_t, 32> out{};
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) ||
        len != out.size()) {
        throw std::runtime_error("sha256 digest failed");
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    static const char* digits = "0123456789abcdef";
    auto digest = sha256(data);
    std::string hex;
    hex.reserve(64);
    for (std::uint8_t byte : digest) {
        hex.push_back(digits[byte >> 4]);
        hex.push_back(digits[byte & 0xf]);
    }
    return hex;
}

std::string salted_id(std::string_view salt, std::string_view value) {
    std::string material;
    material.reserve(salt.size() + value.size() + 1);
    material.append(salt);
    material.push_back('|');
    material.append(value);
    return sha256_hex(material).substr(0, 16);
}

}  // namespace mailsig
