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

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "chainfab/canonical.hpp"
#include "chainfab/crypto.hpp"
#include "chainfab/merkle.hpp"

namespace chainfab {
namespace {

Digest256 digest_of(int i) { return hash_bytes("leaf-" + std::to_string(i)); }

std::vector<Digest256> make_leaves(int n) {
    std::vector<Digest256> out;
    for (int i = 0; i < n; ++i) out.push_back(digest_of(i));
    return out;
}

Digest256 concat_hash(const Digest256& a, const Digest256& b) {
    Bytes buf(a.bytes.begin(), a.bytes.end());
    buf.insert(buf.end(), b.bytes.begin(), b.bytes.end());
    return hash_bytes(ByteView(buf));
}

// Top-down recursive oracle: node(level, i) pairs children 2i and
// min(2i+1, last). Shares no code with the level-by-level implementation.
Digest256 oracle_node(const std::vector<Digest256>& leaves, int level, std::size_t index) {
    if (level == 0) return leaves[index];
    std::size_t below = leaves.size();
    for (int l = 1; l < level; ++l) below = (below + 1) / 2;
    std::size_t right = std::min(2 * index + 1, below - 1);
    return concat_hash(oracle_node(leaves, level - 1, 2 * index), oracle_node(leaves, level - 1, right));
}

Digest256 oracle_root(const std::vector<Digest256>& leaves) {
    if (leaves.empty()) return hash_bytes("");
    int depth = 0;
    for (std::size_t n = leaves.size(); n > 1; n = (n + 1) / 2) ++depth;
    return oracle_node(leaves, depth, 0);
}

TEST(HashBytes, FipsVectors) {
    EXPECT_EQ(hash_bytes("").hex(), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(hash_bytes("abc").hex(), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(hash_bytes("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq").hex(),
              "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST(HashBytes, Deterministic) { EXPECT_EQ(hash_bytes("cube"), hash_bytes("cube")); }

TEST(HashBytes, AvalancheOnSingleBitFlips) {
    std::mt19937_64 rng(7);
    std::set<Digest256> seen;
    Bytes base(64);
    for (auto& b : base) b = static_cast<std::uint8_t>(rng());
    auto base_digest = hash_bytes(ByteView(base));
    seen.insert(base_digest);
    for (std::size_t bit = 0; bit < base.size() * 8; ++bit) {
        Bytes m = base;
        m[bit / 8] ^= static_cast<std::uint8_t>(1U << (bit % 8));
        seen.insert(hash_bytes(ByteView(m)));
    }
    // plus random messages and random flips until 1000 flips have been checked
    for (int i = 0; i < 1000 - 512; ++i) {
        Bytes m(1 + rng() % 100);
        for (auto& b : m) b = static_cast<std::uint8_t>(rng());
        auto d = hash_bytes(ByteView(m));
        std::size_t bit = rng() % (m.size() * 8);
        m[bit / 8] ^= static_cast<std::uint8_t>(1U << (bit % 8));
        EXPECT_NE(d, hash_bytes(ByteView(m)));
    }
    EXPECT_EQ(seen.size(), 513U);
}

struct Rfc8032Vector {
    const char* secret;
    const char* public_key;
    const char* message;
    const char* signature;
};

// RFC 8032 section 7.1, TEST 1..3
const Rfc8032Vector kRfcVectors[] = {
    {"9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60",
     "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a", "",
     "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe2465"
     "5141438e7a100b"},
    {"4ccd089b28ff96da9db6c346ec114e0f5b8a319f35aba624da8cf6ed4fb8a6fb",
     "3d4017c3e843895a92b70aa74d1b7ebc9c982ccf2ec4968cc0cd55f12af4660c", "72",
     "92a009a9f0d4cab8720e820b5f642540a2b27b5416503f8fb3762223ebdb69da085ac1e43e15996e458f3613d0f11d8c387b2eaeb4302aeeb0"
     "0d291612bb0c00"},
    {"c5aa8df43f9f837bedb7442f31dcb7b166d38535076f094b85ce3a2e0b4458f7",
     "fc51cd8e6218a1a38da47ed00230f0580816ed13ba3303ac5deb911548908025", "af82",
     "6291d657deec24024827e69c3abe01a30ce548a284743a445e3680d7db5ac3ac18ff9b538d16f290ae67f760984dc6594a7c15e9716ed28dc0"
     "27beceea1ec40a"},
};

TEST(Ed25519, Rfc8032KnownAnswers) {
    for (const auto& v : kRfcVectors) {
        auto kp = generate_keypair(Seed::from_hex(v.secret));
        EXPECT_EQ(kp.public_key.hex(), v.public_key);
        auto msg = from_hex(v.message);
        auto sig = sign(kp.seed, ByteView(msg));
        EXPECT_EQ(sig.hex(), v.signature);
        EXPECT_TRUE(verify_signature(kp.public_key, ByteView(msg), sig));
    }
}

TEST(Ed25519, SeedLength) {
    Bytes short_seed(31);
    EXPECT_THROW(generate_keypair(ByteView(short_seed)), SeedLengthError);
    Bytes long_seed(33);
    EXPECT_THROW(generate_keypair(ByteView(long_seed)), SeedLengthError);
}

TEST(Ed25519, DeterministicKeysAndSignatures) {
    Seed seed;
    seed.bytes.fill(0x42);
    auto a = generate_keypair(seed);
    auto b = generate_keypair(seed);
    EXPECT_EQ(a.public_key, b.public_key);
    EXPECT_EQ(sign(a, "m"), sign(b, "m"));
}

TEST(Ed25519, FlippedMessageBitAndWrongMessageFail) {
    auto kp = generate_keypair(Seed::from_hex(kRfcVectors[0].secret));
    std::string m = "ellipse in the middle of a cube";
    auto sig = sign(kp, m);
    EXPECT_TRUE(verify_signature(kp.public_key, as_bytes(m), sig));
    std::string flipped = m;
    flipped[3] ^= 0x01;
    EXPECT_FALSE(verify_signature(kp.public_key, as_bytes(flipped), sig));
    EXPECT_FALSE(verify_signature(kp.public_key, as_bytes(std::string("other")), sig));
}

TEST(Ed25519, ForgedAndTruncatedSignaturesFail) {
    std::mt19937_64 rng(11);
    auto kp = generate_keypair(Seed::from_hex(kRfcVectors[1].secret));
    int failures = 0;
    for (int i = 0; i < 1000; ++i) {
        std::string m = "msg-" + std::to_string(rng());
        auto sig = sign(kp, m);
        switch (i % 4) {
            case 0: {  // flip one bit of the signature
                auto s = sig;
                s.bytes[rng() % 64] ^= static_cast<std::uint8_t>(1U << (rng() % 8));
                failures += !verify_signature(kp.public_key, as_bytes(m), s);
                break;
            }
            case 1: {  // truncated
                std::size_t len = rng() % 64;
                failures += !verify_signature(kp.public_key.view(), as_bytes(m), ByteView(sig.bytes.data(), len));
                break;
            }
            case 2: {  // random bytes
                Signature s;
                for (auto& b : s.bytes) b = static_cast<std::uint8_t>(rng());
                failures += !verify_signature(kp.public_key, as_bytes(m), s);
                break;
            }
            default: {  // right signature, wrong key
                Seed other;
                for (auto& b : other.bytes) b = static_cast<std::uint8_t>(rng());
                failures += !verify_signature(generate_keypair(other).public_key, as_bytes(m), sig);
                break;
            }
        }
    }
    EXPECT_EQ(failures, 1000);
}

TEST(Ed25519, MalformedInputsReturnFalse) {
    Bytes empty;
    EXPECT_FALSE(verify_signature(ByteView(empty), ByteView(empty), ByteView(empty)));
}

TEST(Address, MatchesManualHashThenTruncate) {
    auto kp = generate_keypair(Seed::from_hex(kRfcVectors[0].secret));
    auto addr = derive_address(kp.public_key);
    auto manual = hash_bytes(kp.public_key.view()).hex().substr(0, 40);
    EXPECT_EQ(addr.to_string(), "cm1" + manual);
    EXPECT_EQ(derive_address(kp.public_key), addr);
    EXPECT_EQ(Address::parse(addr.to_string()), addr);
}

TEST(Address, NoCollisionsOverTenThousandKeys) {
    std::mt19937_64 rng(99);
    std::set<Address> seen;
    for (int i = 0; i < 10000; ++i) {
        Seed s;
        for (auto& b : s.bytes) b = static_cast<std::uint8_t>(rng());
        seen.insert(derive_address(generate_keypair(s).public_key));
    }
    EXPECT_EQ(seen.size(), 10000U);
}

TEST(Address, ParseRejectsBadText) {
    EXPECT_THROW(Address::parse("xx1" + std::string(40, '0')), HexError);
    EXPECT_THROW(Address::parse("cm1" + std::string(39, '0')), HexError);
    EXPECT_THROW(Address::parse("cm1" + std::string(40, 'A')), HexError);
}

TEST(Hex, StrictLowercase) {
    EXPECT_EQ(to_hex(from_hex("00ff10")), "00ff10");
    EXPECT_THROW(from_hex("0"), HexError);
    EXPECT_THROW(from_hex("FF"), HexError);
    EXPECT_THROW(from_hex("zz"), HexError);
}

TEST(Merkle, DegenerateRules) {
    EXPECT_EQ(merkle_root({}), hash_bytes(""));
    auto d = digest_of(1);
    EXPECT_EQ(merkle_root(std::vector<Digest256>{d}), d);
}

TEST(Merkle, ThreeLeavesHandComposed) {
    auto l = make_leaves(3);
    auto expected = concat_hash(concat_hash(l[0], l[1]), concat_hash(l[2], l[2]));
    EXPECT_EQ(merkle_root(l), expected);
}

TEST(Merkle, ExhaustiveAgreementWithOracleUpToEightLeaves) {
    for (int n = 0; n <= 8; ++n) {
        auto leaves = make_leaves(n);
        auto root = merkle_root(leaves);
        EXPECT_EQ(root, oracle_root(leaves)) << n;
        for (int i = 0; i < n; ++i) {
            auto proof = merkle_prove(leaves, i);
            EXPECT_TRUE(merkle_verify(root, leaves[i], proof)) << n << "/" << i;
            for (int j = 0; j < n; ++j) {
                if (leaves[j] != leaves[i]) EXPECT_FALSE(merkle_verify(root, leaves[j], proof));
            }
            EXPECT_FALSE(merkle_verify(root, digest_of(1000), proof));
        }
    }
}

TEST(Merkle, EveryLeafChangeChangesRoot) {
    for (int n = 1; n <= 8; ++n) {
        auto leaves = make_leaves(n);
        auto root = merkle_root(leaves);
        for (int i = 0; i < n; ++i) {
            auto mutated = leaves;
            mutated[i].bytes[0] ^= 0x80;
            EXPECT_NE(merkle_root(mutated), root);
        }
    }
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        auto leaves = make_leaves(9 + static_cast<int>(rng() % 120));
        auto root = merkle_root(leaves);
        auto i = rng() % leaves.size();
        leaves[i].bytes[rng() % 32] ^= static_cast<std::uint8_t>(1U << (rng() % 8));
        EXPECT_NE(merkle_root(leaves), root);
    }
}

TEST(Merkle, ProofShapeAndErrors) {
    auto leaves = make_leaves(5);
    auto proof = merkle_prove(leaves, 4);
    EXPECT_EQ(proof.siblings.size(), 3U);
    EXPECT_THROW(merkle_prove(leaves, 5), std::out_of_range);
    auto bad = proof;
    bad.sibling_on_right[0] = !bad.sibling_on_right[0];
    EXPECT_FALSE(merkle_verify(merkle_root(leaves), leaves[4], bad));
    auto wrong_index = proof;
    wrong_index.leaf_index = 3;
    EXPECT_FALSE(merkle_verify(merkle_root(leaves), leaves[4], wrong_index));
}

TEST(Merkle, RandomLargeTreesRoundTrip) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        auto leaves = make_leaves(1 + static_cast<int>(rng() % 300));
        auto root = merkle_root(leaves);
        EXPECT_EQ(root, oracle_root(leaves));
        auto i = rng() % leaves.size();
        EXPECT_TRUE(merkle_verify(root, leaves[i], merkle_prove(leaves, i)));
    }
}

TEST(CanonicalEncode, SortsKeysWithoutWhitespace) {
    Json j = Json::parse(R"({ "b": 1, "a": 2 })");
    EXPECT_EQ(canonical_encode(j), R"({"a":2,"b":1})");
    EXPECT_EQ(canonical_encode(j), canonical_encode(j));
    Json nested = Json::parse(R"({"z":[3,{"y":"s","x":-1}],"m":null,"k":true})");
    EXPECT_EQ(canonical_encode(nested), R"({"k":true,"m":null,"z":[3,{"x":-1,"y":"s"}]})");
}

TEST(CanonicalEncode, RejectsFloats) {
    EXPECT_THROW(canonical_encode(Json{{"price", 1.5}}), UnencodableError);
    EXPECT_THROW(canonical_encode(Json::array({1, 2.0})), UnencodableError);
}

TEST(CanonicalEncode, RejectsInvalidUtf8) {
    EXPECT_THROW(canonical_encode(Json(std::string("\xff\xfe"))), UnencodableError);
}

TEST(CanonicalDecode, RequiresCanonicalInput) {
    EXPECT_EQ(canonical_decode(R"({"a":2,"b":1})")["b"], 1);
    EXPECT_THROW(canonical_decode(R"({"b":1,"a":2})"), DecodeError);
    EXPECT_THROW(canonical_decode(R"({"a": 2})"), DecodeError);
    EXPECT_THROW(canonical_decode(R"({"a":2.0})"), DecodeError);
    EXPECT_THROW(canonical_decode(R"({"a":02})"), DecodeError);
    EXPECT_THROW(canonical_decode(R"({"a":1,"a":2})"), DecodeError);
    EXPECT_THROW(canonical_decode("not json"), DecodeError);
}

}  // namespace
}  // namespace chainfab
