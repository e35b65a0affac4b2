#pragma once

#include <openssl/evp.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qss/field.hpp"

namespace qss {

/// Hashes a field element into its own field with domain separation.
/// Preimage is the UTF-8 string "QSS|" + context + "|" + dec(d) + "|" + dec(x);
/// the SHA-256 digest, read as a big-endian integer, is reduced mod d.
inline FieldElement hash_fe(FieldElement x, std::string_view context) {
    const PrimeModulus m = x.modulus();
    const std::string preimage = "QSS|" + std::string(context) + "|" +
                                 std::to_string(m.value()) + "|" + std::to_string(x.value());
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(preimage.data(), preimage.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::uint64_t r = 0;
    for (unsigned int i = 0; i < len; ++i)
        r = (r * 256 + digest[i]) % m.value();
    return {static_cast<std::int64_t>(r), m};
}

}  // namespace qss
