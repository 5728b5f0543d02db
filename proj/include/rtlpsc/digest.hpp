#pragma once

#include <openssl/evp.h>

#include <memory>
#include <string>
#include <string_view>

#include "rtlpsc/bits.hpp"
#include "rtlpsc/error.hpp"

namespace rtlpsc {

// Streaming SHA-256, hex-encoded on finish().
class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
    }

    Sha256& update(std::string_view data) {
        if (EVP_DigestUpdate(ctx_.get(), data.data(), data.size()) != 1) throw Error("SHA-256 update failed");
        return *this;
    }

    std::string finish() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1) throw Error("SHA-256 final failed");
        return to_hex(std::span<const Byte>(md, len));
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline std::string sha256_hex(std::string_view data) { return Sha256().update(data).finish(); }

}  // namespace rtlpsc
