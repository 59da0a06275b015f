/*
   Copyright 2026 The Chainfab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "chainfab/crypto.hpp"

#include <bit>
#include <mutex>

#include <sodium.h>

namespace chainfab {

namespace {

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
    });
}

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

}  // namespace

std::string to_hex(ByteView data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw HexError("odd-length hex string");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_value(hex[2 * i]);
        int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw HexError("invalid hex character");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

Address Address::parse(std::string_view text) {
    if (!text.starts_with(prefix)) throw HexError("address must start with \"cm1\"");
    Address a;
    static_cast<FixedBytes<20, AddressTag>&>(a) = FixedBytes<20, AddressTag>::from_hex(text.substr(prefix.size()));
    return a;
}

Digest256 hash_bytes(ByteView data) {
    ensure_sodium();
    Digest256 out;
    crypto_hash_sha256(out.bytes.data(), data.data(), data.size());
    return out;
}

KeyPair generate_keypair(ByteView seed) {
    if (seed.size() != crypto_sign_SEEDBYTES) {
        throw SeedLengthError("seed must be 32 bytes, got " + std::to_string(seed.size()));
    }
    ensure_sodium();
    KeyPair kp;
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
    crypto_sign_seed_keypair(kp.public_key.bytes.data(), sk.data(), seed.data());
    sodium_memzero(sk.data(), sk.size());
    std::copy(seed.begin(), seed.end(), kp.seed.bytes.begin());
    return kp;
}

KeyPair random_keypair() {
    ensure_sodium();
    Seed seed;
    randombytes_buf(seed.bytes.data(), seed.bytes.size());
    return generate_keypair(seed);
}

Signature sign(const Seed& secret, ByteView message) {
    ensure_sodium();
    std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES> pk{};
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> sk{};
    crypto_sign_seed_keypair(pk.data(), sk.data(), secret.bytes.data());
    Signature sig;
    crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(), sk.data());
    sodium_memzero(sk.data(), sk.size());
    return sig;
}

bool verify_signature(const PublicKey& public_key, ByteView message, const Signature& signature) noexcept {
    return verify_signature(public_key.view(), message, signature.view());
}

bool verify_signature(ByteView public_key, ByteView message, ByteView signature) noexcept {
    if (public_key.size() != crypto_sign_PUBLICKEYBYTES || signature.size() != crypto_sign_BYTES) return false;
    if (sodium_init() < 0) return false;
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(), public_key.data()) == 0;
}

Address derive_address(const PublicKey& public_key) {
    auto digest = hash_bytes(public_key.view());
    Address a;
    std::copy_n(digest.bytes.begin(), a.bytes.size(), a.bytes.begin());
    return a;
}

int leading_zero_bits(const Digest256& digest) {
    int bits = 0;
    for (auto b : digest.bytes) {
        if (b == 0) {
            bits += 8;
            continue;
        }
        bits += std::countl_zero(b);
        break;
    }
    return bits;
}

}  // namespace chainfab
