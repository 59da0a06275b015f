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

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chainfab/node.hpp"

namespace chainfab {

class ScenarioInvalid : public std::invalid_argument {
  public:
    explicit ScenarioInvalid(std::vector<std::string> errors);
    [[nodiscard]] const std::vector<std::string>& errors() const { return errors_; }

  private:
    std::vector<std::string> errors_;
};

class UnknownTarget : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

struct ScenarioNode {
    std::string name;
    NodeRole role = NodeRole::Observer;
    Amount balance = 0;
    std::optional<ProviderPolicy> policy;
    std::optional<bool> produce;  // default: any PoW node, validators in authority mode
};

enum class ActionType { SubmitRequest, Accept, Confirm, Transfer, Kill, Restart, Partition, Heal, InjectInvalid };

std::string_view to_string(ActionType type);

struct ScenarioAction {
    std::int64_t at_s = 0;
    ActionType type = ActionType::Heal;
    std::string node;  // actor; its key signs
    std::string via;   // node that receives the submission; defaults to node
    std::string label;  // request label for submit_request / accept / confirm
    std::string spec;
    std::string tag;
    std::int64_t due_in_s = 0;
    Amount max_price = 0;
    std::size_t rank = 0;  // accept: position in the offer ranking
    std::string to;
    Amount amount = 0;
    std::vector<std::vector<std::string>> groups;
    std::string invalid_kind;  // "bad_pow", "bad_signature" or "garbage"

    [[nodiscard]] Json to_json() const;
};

struct Scenario {
    std::uint64_t seed = 42;
    std::string network_id = "chainfab-sim";
    UnixSeconds genesis_time = 1700000000;
    ConsensusConfig consensus;  // authorities are filled from validator nodes
    std::int64_t block_interval_s = 10;
    Millis latency_min_ms = 10;
    Millis latency_max_ms = 100;
    double drop = 0.0;
    std::vector<ScenarioNode> nodes;
    std::vector<ScenarioAction> actions;
    std::int64_t duration_s = 120;
    std::int64_t settle_s = 60;
    std::optional<std::string> tamper_node;

    // Throws ScenarioInvalid listing every bad field.
    static Scenario from_json(const Json& j);
    static Scenario load(const std::string& path);
    [[nodiscard]] Json to_json() const;
    void validate() const;

    [[nodiscard]] std::optional<std::size_t> index_of(const std::string& name) const;
    [[nodiscard]] KeyPair key_of(const std::string& name) const;
    [[nodiscard]] GenesisConfig genesis() const;
    [[nodiscard]] bool produces(const ScenarioNode& node) const;
};

enum class FaultKind { Kill, Restart, Partition, Heal };

// Adds a fault to the timeline. Throws UnknownTarget for names not in the roster.
void inject_fault(Scenario& scenario, FaultKind kind, const std::vector<std::string>& targets, std::int64_t at_s);

struct SimReport {
    Json doc;

    [[nodiscard]] std::string encode() const { return canonical_encode(doc); }
    [[nodiscard]] bool converged() const { return doc.at("convergence").get<bool>(); }
    [[nodiscard]] std::vector<std::string> violations() const;
};

SimReport run_scenario(const Scenario& scenario);

// Empty when every invariant holds.
std::vector<std::string> check_invariants(const SimReport& report, const Scenario& scenario);

}  // namespace chainfab
