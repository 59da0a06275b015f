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

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "chainfab/crypto.hpp"

namespace chainfab {

// Binary tree, parent = H(left || right). A level with an odd node count
// pairs its last node with itself. One leaf: the root is the leaf. No
// leaves: the root is H("").
Digest256 merkle_root(std::span<const Digest256> leaves);

struct MerkleProof {
    std::size_t leaf_index = 0;
    std::vector<Digest256> siblings;
    // true when the sibling at that level sits to the right of the running hash
    std::vector<bool> sibling_on_right;
};

MerkleProof merkle_prove(std::span<const Digest256> leaves, std::size_t index);

bool merkle_verify(const Digest256& root, const Digest256& leaf, const MerkleProof& proof);

}  // namespace chainfab
