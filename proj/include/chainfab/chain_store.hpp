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

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "chainfab/block.hpp"

namespace chainfab {

// Sum of 2^pow_zero_bits along a branch.
using Work = unsigned __int128;

std::string work_to_string(Work w);

struct ChainEntry {
    Block block;
    Digest256 id;
    Work cumulative_work = 0;
    std::shared_ptr<const LedgerState> state;  // ledger state after this block

    [[nodiscard]] std::uint64_t height() const { return block.header.height; }
};

enum class AddOutcome { Added, Duplicate, UnknownParent, Invalid };

struct AddResult {
    AddOutcome outcome;
    Digest256 id;
    std::vector<BlockViolation> violations;
};

/// All known blocks of every branch, each with its post-state. Single writer;
/// callers serialize add_block.
class ChainStore {
  public:
    explicit ChainStore(GenesisConfig genesis);

    AddResult add_block(const Block& block);

    [[nodiscard]] const GenesisConfig& genesis() const { return genesis_; }
    [[nodiscard]] const ConsensusConfig& consensus() const { return genesis_.consensus; }
    [[nodiscard]] const Digest256& genesis_id() const { return genesis_id_; }

    [[nodiscard]] const ChainEntry* find(const Digest256& id) const;
    [[nodiscard]] bool contains(const Digest256& id) const { return entries_.contains(id); }
    [[nodiscard]] const std::set<Digest256>& tips() const { return tips_; }
    [[nodiscard]] std::vector<Digest256> children(const Digest256& id) const;
    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] const std::map<Digest256, ChainEntry>& entries() const { return entries_; }

    // Entries from genesis to tip, inclusive.
    [[nodiscard]] std::vector<const ChainEntry*> branch(const Digest256& tip) const;
    [[nodiscard]] const ChainEntry* ancestor_at(const Digest256& tip, std::uint64_t height) const;

  private:
    GenesisConfig genesis_;
    Digest256 genesis_id_;
    std::map<Digest256, ChainEntry> entries_;
    std::multimap<Digest256, Digest256> children_;
    std::set<Digest256> tips_;
};

/// Tip with the greatest cumulative work; ties go to the smallest block id.
Digest256 fork_choice(const ChainStore& store);

}  // namespace chainfab
