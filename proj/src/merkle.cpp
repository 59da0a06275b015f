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

#include "chainfab/merkle.hpp"

#include <string>

namespace chainfab {

namespace {

Digest256 hash_pair(const Digest256& left, const Digest256& right) {
    std::array<std::uint8_t, 64> buf{};
    std::copy(left.bytes.begin(), left.bytes.end(), buf.begin());
    std::copy(right.bytes.begin(), right.bytes.end(), buf.begin() + 32);
    return hash_bytes(ByteView(buf));
}

std::vector<Digest256> next_level(const std::vector<Digest256>& level) {
    std::vector<Digest256> parent;
    parent.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
        const auto& left = level[i];
        const auto& right = i + 1 < level.size() ? level[i + 1] : level[i];
        parent.push_back(hash_pair(left, right));
    }
    return parent;
}

}  // namespace

Digest256 merkle_root(std::span<const Digest256> leaves) {
    if (leaves.empty()) return hash_bytes(ByteView{});
    std::vector<Digest256> level(leaves.begin(), leaves.end());
    while (level.size() > 1) level = next_level(level);
    return level.front();
}

MerkleProof merkle_prove(std::span<const Digest256> leaves, std::size_t index) {
    if (index >= leaves.size()) {
        throw std::out_of_range("merkle leaf index " + std::to_string(index) + " out of range for " +
                                std::to_string(leaves.size()) + " leaves");
    }
    MerkleProof proof;
    proof.leaf_index = index;
    std::vector<Digest256> level(leaves.begin(), leaves.end());
    std::size_t pos = index;
    while (level.size() > 1) {
        bool is_left = pos % 2 == 0;
        std::size_t sibling = is_left ? std::min(pos + 1, level.size() - 1) : pos - 1;
        proof.siblings.push_back(level[sibling]);
        proof.sibling_on_right.push_back(is_left);
        level = next_level(level);
        pos /= 2;
    }
    return proof;
}

bool merkle_verify(const Digest256& root, const Digest256& leaf, const MerkleProof& proof) {
    if (proof.siblings.size() != proof.sibling_on_right.size()) return false;
    if (proof.siblings.size() < 64 && (proof.leaf_index >> proof.siblings.size()) != 0) return false;
    Digest256 running = leaf;
    for (std::size_t level = 0; level < proof.siblings.size(); ++level) {
        // direction flags must agree with the claimed leaf position
        bool index_is_left = ((proof.leaf_index >> level) & 1U) == 0;
        if (proof.sibling_on_right[level] != index_is_left) return false;
        running = index_is_left ? hash_pair(running, proof.siblings[level])
                                : hash_pair(proof.siblings[level], running);
    }
    return running == root;
}

}  // namespace chainfab
