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

#include "chainfab/sim_harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "chainfab/sim_network.hpp"

namespace chainfab {

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// Collects field-level problems instead of stopping at the first one.
class Reader {
  public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    void error(const std::string& path, const std::string& msg) { errors_.push_back(path + ": " + msg); }

    bool object(const Json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
        if (!j.is_object()) {
            error(path, "expected an object");
            return false;
        }
        for (const auto& [k, _] : j.items()) {
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) error(path + "." + k, "unknown field");
        }
        return true;
    }

    template <typename T>
    std::optional<T> get(const Json& j, const std::string& key, const std::string& path, bool required) {
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) error(path + "." + key, "missing");
            return std::nullopt;
        }
        const Json& v = *it;
        if constexpr (std::is_same_v<T, std::string>) {
            if (v.is_string()) return v.get<std::string>();
            error(path + "." + key, "expected a string");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (v.is_boolean()) return v.get<bool>();
            error(path + "." + key, "expected true or false");
        } else if constexpr (std::is_same_v<T, double>) {
            if (v.is_number()) return v.get<double>();
            error(path + "." + key, "expected a number");
        } else {
            if (v.is_number_integer()) return v.get<std::int64_t>();
            error(path + "." + key, "expected an integer");
        }
        return std::nullopt;
    }

  private:
    std::vector<std::string>& errors_;
};

constexpr std::array<std::string_view, 9> kActionNames = {"submit_request", "accept", "confirm", "transfer", "kill",
                                                          "restart",        "partition", "heal",  "inject_invalid"};

std::optional<ActionType> parse_action_type(std::string_view name) {
    for (std::size_t i = 0; i < kActionNames.size(); ++i) {
        if (kActionNames[i] == name) return static_cast<ActionType>(i);
    }
    return std::nullopt;
}

ScenarioAction parse_action(const Json& j, const std::string& path, Reader& r) {
    ScenarioAction a;
    if (!r.object(j, path, {"at_s", "type", "node", "via", "label", "spec", "tag", "due_in_s", "max_price", "rank", "to",
                            "amount", "groups", "kind"})) {
        return a;
    }
    a.at_s = r.get<std::int64_t>(j, "at_s", path, true).value_or(0);
    auto type_name = r.get<std::string>(j, "type", path, true);
    if (type_name) {
        if (auto t = parse_action_type(*type_name)) {
            a.type = *t;
        } else {
            r.error(path + ".type", "unknown action \"" + *type_name + "\"");
            return a;
        }
    } else {
        return a;
    }
    bool needs_node = a.type != ActionType::Partition && a.type != ActionType::Heal;
    a.node = r.get<std::string>(j, "node", path, needs_node).value_or("");
    a.via = r.get<std::string>(j, "via", path, false).value_or("");
    switch (a.type) {
        case ActionType::SubmitRequest:
            a.label = r.get<std::string>(j, "label", path, true).value_or("");
            a.spec = r.get<std::string>(j, "spec", path, true).value_or("");
            a.tag = r.get<std::string>(j, "tag", path, true).value_or("");
            a.due_in_s = r.get<std::int64_t>(j, "due_in_s", path, true).value_or(0);
            a.max_price = r.get<std::int64_t>(j, "max_price", path, true).value_or(0);
            break;
        case ActionType::Accept: {
            a.label = r.get<std::string>(j, "label", path, true).value_or("");
            auto rank = r.get<std::int64_t>(j, "rank", path, false).value_or(0);
            if (rank < 0) r.error(path + ".rank", "must be >= 0");
            a.rank = static_cast<std::size_t>(std::max<std::int64_t>(rank, 0));
            break;
        }
        case ActionType::Confirm:
            a.label = r.get<std::string>(j, "label", path, true).value_or("");
            break;
        case ActionType::Transfer:
            a.to = r.get<std::string>(j, "to", path, true).value_or("");
            a.amount = r.get<std::int64_t>(j, "amount", path, true).value_or(0);
            break;
        case ActionType::Partition: {
            auto it = j.find("groups");
            if (it == j.end() || !it->is_array()) {
                r.error(path + ".groups", "expected an array of name arrays");
                break;
            }
            for (std::size_t g = 0; g < it->size(); ++g) {
                const auto& group = (*it)[g];
                std::vector<std::string> names;
                if (!group.is_array()) {
                    r.error(path + ".groups[" + std::to_string(g) + "]", "expected an array of names");
                    continue;
                }
                for (const auto& n : group) {
                    if (n.is_string()) {
                        names.push_back(n.get<std::string>());
                    } else {
                        r.error(path + ".groups[" + std::to_string(g) + "]", "names must be strings");
                    }
                }
                a.groups.push_back(std::move(names));
            }
            break;
        }
        case ActionType::InjectInvalid:
            a.invalid_kind = r.get<std::string>(j, "kind", path, false).value_or("bad_pow");
            break;
        case ActionType::Kill:
        case ActionType::Restart:
        case ActionType::Heal:
            break;
    }
    return a;
}

std::string hex_of(const Digest256& d) { return d.hex(); }

Millis percentile(std::vector<Millis> v, int pct) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    std::size_t rank = (static_cast<std::size_t>(pct) * v.size() + 99) / 100;
    return v[std::max<std::size_t>(rank, 1) - 1];
}

}  // namespace

std::string_view to_string(ActionType type) { return kActionNames.at(static_cast<std::size_t>(type)); }

ScenarioInvalid::ScenarioInvalid(std::vector<std::string> errors)
    : std::invalid_argument("invalid scenario: " + join(errors, "; ")), errors_(std::move(errors)) {}

Json ScenarioAction::to_json() const {
    Json j{{"at_s", at_s}, {"type", std::string(to_string(type))}};
    if (!node.empty()) j["node"] = node;
    if (!via.empty()) j["via"] = via;
    switch (type) {
        case ActionType::SubmitRequest:
            j["label"] = label;
            j["spec"] = spec;
            j["tag"] = tag;
            j["due_in_s"] = due_in_s;
            j["max_price"] = max_price;
            break;
        case ActionType::Accept:
            j["label"] = label;
            j["rank"] = rank;
            break;
        case ActionType::Confirm:
            j["label"] = label;
            break;
        case ActionType::Transfer:
            j["to"] = to;
            j["amount"] = amount;
            break;
        case ActionType::Partition:
            j["groups"] = groups;
            break;
        case ActionType::InjectInvalid:
            j["kind"] = invalid_kind;
            break;
        default:
            break;
    }
    return j;
}

Scenario Scenario::from_json(const Json& j) {
    std::vector<std::string> errors;
    Reader r(errors);
    Scenario s;
    if (!r.object(j, "scenario", {"seed", "network_id", "genesis_time", "consensus", "block_interval_s", "network", "nodes",
                                  "actions", "duration_s", "settle_s", "tamper_drill"})) {
        throw ScenarioInvalid(errors);
    }
    if (auto seed = r.get<std::int64_t>(j, "seed", "scenario", true)) {
        if (*seed < 0) r.error("scenario.seed", "must be >= 0");
        s.seed = static_cast<std::uint64_t>(*seed);
    }
    s.network_id = r.get<std::string>(j, "network_id", "scenario", false).value_or(s.network_id);
    s.genesis_time = r.get<std::int64_t>(j, "genesis_time", "scenario", false).value_or(s.genesis_time);
    s.block_interval_s = r.get<std::int64_t>(j, "block_interval_s", "scenario", false).value_or(s.block_interval_s);
    s.duration_s = r.get<std::int64_t>(j, "duration_s", "scenario", true).value_or(0);
    s.settle_s = r.get<std::int64_t>(j, "settle_s", "scenario", false).value_or(s.settle_s);

    if (auto it = j.find("consensus"); it != j.end()) {
        const std::string path = "scenario.consensus";
        if (r.object(*it, path, {"mode", "pow_zero_bits", "block_reward", "finality_depth"})) {
            auto mode = r.get<std::string>(*it, "mode", path, true).value_or("pow");
            if (mode == "pow") {
                s.consensus.mode = ConsensusMode::ProofOfWork;
            } else if (mode == "authority") {
                s.consensus.mode = ConsensusMode::RoundRobinAuthority;
            } else {
                r.error(path + ".mode", "expected \"pow\" or \"authority\"");
            }
            s.consensus.pow_zero_bits =
                static_cast<int>(r.get<std::int64_t>(*it, "pow_zero_bits", path, false).value_or(s.consensus.pow_zero_bits));
            s.consensus.block_reward = r.get<std::int64_t>(*it, "block_reward", path, false).value_or(s.consensus.block_reward);
            auto depth = r.get<std::int64_t>(*it, "finality_depth", path, false);
            if (depth && *depth < 0) r.error(path + ".finality_depth", "must be >= 0");
            if (depth) s.consensus.finality_depth = static_cast<std::uint64_t>(std::max<std::int64_t>(*depth, 0));
        }
    }

    if (auto it = j.find("network"); it != j.end()) {
        const std::string path = "scenario.network";
        if (r.object(*it, path, {"latency_ms", "drop"})) {
            if (auto lat = it->find("latency_ms"); lat != it->end()) {
                if (r.object(*lat, path + ".latency_ms", {"min", "max"})) {
                    s.latency_min_ms = r.get<std::int64_t>(*lat, "min", path + ".latency_ms", true).value_or(0);
                    s.latency_max_ms = r.get<std::int64_t>(*lat, "max", path + ".latency_ms", true).value_or(0);
                }
            }
            s.drop = r.get<double>(*it, "drop", path, false).value_or(0.0);
        }
    }

    if (auto it = j.find("nodes"); it == j.end() || !it->is_array()) {
        r.error("scenario.nodes", "expected an array");
    } else {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& nj = (*it)[i];
            const std::string path = "scenario.nodes[" + std::to_string(i) + "]";
            if (!r.object(nj, path, {"name", "role", "balance", "policy", "produce"})) continue;
            ScenarioNode n;
            n.name = r.get<std::string>(nj, "name", path, true).value_or("");
            auto role = r.get<std::string>(nj, "role", path, true).value_or("observer");
            if (auto parsed = parse_node_role(role)) {
                n.role = *parsed;
            } else {
                r.error(path + ".role", "unknown role \"" + role + "\"");
            }
            n.balance = r.get<std::int64_t>(nj, "balance", path, false).value_or(0);
            n.produce = r.get<bool>(nj, "produce", path, false);
            if (auto pol = nj.find("policy"); pol != nj.end()) {
                const std::string pp = path + ".policy";
                if (r.object(*pol, pp, {"capabilities", "base_cost", "margin", "lead_time"})) {
                    ProviderPolicy p;
                    if (auto caps = pol->find("capabilities"); caps != pol->end() && caps->is_array()) {
                        for (const auto& c : *caps) {
                            if (c.is_string()) {
                                p.capabilities.push_back(c.get<std::string>());
                            } else {
                                r.error(pp + ".capabilities", "tags must be strings");
                            }
                        }
                    } else {
                        r.error(pp + ".capabilities", "expected an array of tags");
                    }
                    p.base_cost = r.get<std::int64_t>(*pol, "base_cost", pp, true).value_or(0);
                    p.margin = r.get<std::int64_t>(*pol, "margin", pp, true).value_or(0);
                    p.lead_time = r.get<std::int64_t>(*pol, "lead_time", pp, true).value_or(0);
                    n.policy = p;
                }
            }
            s.nodes.push_back(std::move(n));
        }
    }

    if (auto it = j.find("actions"); it != j.end()) {
        if (!it->is_array()) {
            r.error("scenario.actions", "expected an array");
        } else {
            for (std::size_t i = 0; i < it->size(); ++i) {
                s.actions.push_back(parse_action((*it)[i], "scenario.actions[" + std::to_string(i) + "]", r));
            }
        }
    }

    if (auto it = j.find("tamper_drill"); it != j.end()) {
        if (r.object(*it, "scenario.tamper_drill", {"node"})) {
            s.tamper_node = r.get<std::string>(*it, "node", "scenario.tamper_drill", true);
        }
    }

    if (errors.empty()) {
        try {
            s.validate();
        } catch (const ScenarioInvalid& e) {
            errors = e.errors();
        }
    }
    if (!errors.empty()) throw ScenarioInvalid(errors);
    return s;
}

Scenario Scenario::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ScenarioInvalid({path + ": " + e.what()});
    }
    return from_json(j);
}

Json Scenario::to_json() const {
    Json nodes_j = Json::array();
    for (const auto& n : nodes) {
        Json nj{{"name", n.name}, {"role", std::string(chainfab::to_string(n.role))}};
        if (n.balance) nj["balance"] = n.balance;
        if (n.produce) nj["produce"] = *n.produce;
        if (n.policy) {
            nj["policy"] = {{"capabilities", n.policy->capabilities},
                            {"base_cost", n.policy->base_cost},
                            {"margin", n.policy->margin},
                            {"lead_time", n.policy->lead_time}};
        }
        nodes_j.push_back(std::move(nj));
    }
    Json actions_j = Json::array();
    for (const auto& a : actions) actions_j.push_back(a.to_json());
    Json j{{"seed", seed},
           {"network_id", network_id},
           {"genesis_time", genesis_time},
           {"consensus",
            {{"mode", consensus.mode == ConsensusMode::ProofOfWork ? "pow" : "authority"},
             {"pow_zero_bits", consensus.pow_zero_bits},
             {"block_reward", consensus.block_reward},
             {"finality_depth", consensus.finality_depth}}},
           {"block_interval_s", block_interval_s},
           {"network", {{"latency_ms", {{"min", latency_min_ms}, {"max", latency_max_ms}}}, {"drop", drop}}},
           {"nodes", nodes_j},
           {"actions", actions_j},
           {"duration_s", duration_s},
           {"settle_s", settle_s}};
    if (tamper_node) j["tamper_drill"] = {{"node", *tamper_node}};
    return j;
}

std::optional<std::size_t> Scenario::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].name == name) return i;
    }
    return std::nullopt;
}

void Scenario::validate() const {
    std::vector<std::string> errors;
    auto err = [&](const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); };
    if (nodes.empty()) err("scenario.nodes", "roster is empty");
    std::set<std::string> names;
    bool any_validator = false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        const std::string path = "scenario.nodes[" + std::to_string(i) + "]";
        if (n.name.empty()) err(path + ".name", "must not be empty");
        if (!names.insert(n.name).second) err(path + ".name", "duplicate name \"" + n.name + "\"");
        if (n.balance < 0) err(path + ".balance", "must be >= 0");
        if (n.policy && (n.policy->base_cost < 0 || n.policy->margin < 0 || n.policy->lead_time < 0)) {
            err(path + ".policy", "values must be >= 0");
        }
        if (n.policy && n.role != NodeRole::Provider) err(path + ".policy", "only providers carry a policy");
        any_validator = any_validator || n.role == NodeRole::Validator;
    }
    if (consensus.mode == ConsensusMode::RoundRobinAuthority && !any_validator) {
        err("scenario.nodes", "authority mode needs at least one validator");
    }
    if (consensus.mode == ConsensusMode::ProofOfWork && (consensus.pow_zero_bits < 1 || consensus.pow_zero_bits > 24)) {
        err("scenario.consensus.pow_zero_bits", "must be within 1..24 for simulation");
    }
    if (consensus.block_reward < 0) err("scenario.consensus.block_reward", "must be >= 0");
    if (block_interval_s <= 0) err("scenario.block_interval_s", "must be positive");
    if (duration_s <= 0) err("scenario.duration_s", "must be positive");
    if (settle_s < 0) err("scenario.settle_s", "must be >= 0");
    if (latency_min_ms < 0 || latency_max_ms < latency_min_ms) err("scenario.network.latency_ms", "need 0 <= min <= max");
    if (!(drop >= 0.0 && drop <= 1.0)) err("scenario.network.drop", "must be within [0, 1]");
    if (tamper_node && !names.contains(*tamper_node)) err("scenario.tamper_drill.node", "unknown node \"" + *tamper_node + "\"");

    std::set<std::string> labels;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const auto& a = actions[i];
        const std::string path = "scenario.actions[" + std::to_string(i) + "]";
        if (a.at_s < 0 || a.at_s > duration_s) err(path + ".at_s", "must be within [0, duration_s]");
        auto known = [&](const std::string& field, const std::string& name) {
            if (!names.contains(name)) err(path + "." + field, "unknown node \"" + name + "\"");
        };
        if (a.type != ActionType::Partition && a.type != ActionType::Heal) known("node", a.node);
        if (!a.via.empty()) known("via", a.via);
        switch (a.type) {
            case ActionType::SubmitRequest:
                if (a.label.empty()) err(path + ".label", "must not be empty");
                if (!labels.insert(a.label).second) err(path + ".label", "duplicate label \"" + a.label + "\"");
                break;
            case ActionType::Accept:
            case ActionType::Confirm:
                if (!labels.contains(a.label)) err(path + ".label", "no earlier submit_request labelled \"" + a.label + "\"");
                break;
            case ActionType::Transfer:
                known("to", a.to);
                break;
            case ActionType::Partition:
                if (a.groups.size() < 2) err(path + ".groups", "need at least two groups");
                for (const auto& g : a.groups) {
                    for (const auto& n : g) known("groups", n);
                }
                break;
            case ActionType::InjectInvalid:
                if (a.invalid_kind != "bad_pow" && a.invalid_kind != "bad_signature" && a.invalid_kind != "garbage") {
                    err(path + ".kind", "expected bad_pow, bad_signature or garbage");
                }
                break;
            default:
                break;
        }
    }
    if (!errors.empty()) throw ScenarioInvalid(errors);
}

KeyPair Scenario::key_of(const std::string& name) const {
    auto d = hash_bytes("chainfab-sim:" + std::to_string(seed) + ":" + name);
    Seed s;
    s.bytes = d.bytes;
    return generate_keypair(s);
}

GenesisConfig Scenario::genesis() const {
    GenesisConfig g;
    g.network_id = network_id;
    g.timestamp = genesis_time;
    g.consensus = consensus;
    g.consensus.authorities.clear();
    for (const auto& n : nodes) {
        auto addr = derive_address(key_of(n.name).public_key);
        if (n.balance > 0) g.allocations[addr] = n.balance;
        if (n.role == NodeRole::Validator) g.consensus.authorities.push_back(addr);
    }
    return g;
}

bool Scenario::produces(const ScenarioNode& node) const {
    if (node.produce) return *node.produce;
    if (consensus.mode == ConsensusMode::RoundRobinAuthority) return node.role == NodeRole::Validator;
    return node.role != NodeRole::Observer;
}

void inject_fault(Scenario& scenario, FaultKind kind, const std::vector<std::string>& targets, std::int64_t at_s) {
    for (const auto& t : targets) {
        if (!scenario.index_of(t)) throw UnknownTarget("no node named \"" + t + "\"");
    }
    ScenarioAction a;
    a.at_s = at_s;
    switch (kind) {
        case FaultKind::Kill:
        case FaultKind::Restart:
            if (targets.size() != 1) throw std::invalid_argument("kill and restart take exactly one target");
            a.type = kind == FaultKind::Kill ? ActionType::Kill : ActionType::Restart;
            a.node = targets.front();
            break;
        case FaultKind::Partition: {
            a.type = ActionType::Partition;
            std::vector<std::string> rest;
            for (const auto& n : scenario.nodes) {
                if (std::find(targets.begin(), targets.end(), n.name) == targets.end()) rest.push_back(n.name);
            }
            a.groups = {targets, rest};
            break;
        }
        case FaultKind::Heal:
            a.type = ActionType::Heal;
            break;
    }
    // Keep the timeline ordered; equal times keep insertion order.
    auto pos = std::upper_bound(scenario.actions.begin(), scenario.actions.end(), at_s,
                                [](std::int64_t t, const ScenarioAction& x) { return t < x.at_s; });
    scenario.actions.insert(pos, a);
}

std::vector<std::string> SimReport::violations() const {
    std::vector<std::string> out;
    for (const auto& v : doc.at("invariants").at("violations")) out.push_back(v.get<std::string>());
    return out;
}

namespace {

constexpr Millis kTickMs = 500;

class Runner {
  public:
    explicit Runner(const Scenario& sc)
        : sc_(sc),
          genesis_(sc.genesis()),
          net_(SimNetConfig{sc.seed, sc.latency_min_ms, sc.latency_max_ms, sc.drop}),
          production_rng_(sc.seed ^ 0x9e3779b97f4a7c15ULL) {
        for (const auto& n : sc_.nodes) {
            auto slot = std::make_unique<Slot>();
            slot->name = n.name;
            slot->transport = &net_.add_endpoint(n.name);
            NodeOptions& o = slot->options;
            o.role = n.role;
            o.key = sc_.key_of(n.name);
            o.genesis = genesis_;
            o.listen = n.name;
            for (const auto& other : sc_.nodes) {
                if (other.name != n.name) o.bootstrap.push_back(other.name);
            }
            o.policy = n.policy;
            o.produce = sc_.produces(n);
            o.produce_empty = true;
            o.ping_interval_ms = 2'000;
            o.handshake_timeout_ms = 4'000;
            o.sync_timeout_ms = 8'000;
            slot->address = derive_address(o.key.public_key);
            names_[slot->address] = n.name;
            slots_.push_back(std::move(slot));
        }
        end_ms_ = (sc_.duration_s + sc_.settle_s) * 1000;
        production_end_ms_ = sc_.duration_s * 1000;
    }

    SimReport run() {
        for (std::size_t i = 0; i < slots_.size(); ++i) boot(i);
        for (std::size_t i = 0; i < slots_.size(); ++i) slots_[i]->node->start(now());
        for (const auto& a : sc_.actions) {
            net_.schedule(a.at_s * 1000, [this, &a] { actions_.push_back(perform(a)); });
        }
        schedule_ticks();
        schedule_production();
        net_.run_until(end_ms_);
        net_.run_until_quiescent();
        return report();
    }

  private:
    struct Slot {
        std::string name;
        Address address;
        NodeOptions options;
        SimTransport* transport = nullptr;
        MemoryJournal journal;
        std::unique_ptr<Node> node;
        bool alive = false;
    };

    Millis now() const { return sc_.genesis_time * 1000 + net_.now(); }

    void boot(std::size_t i) {
        auto& s = *slots_[i];
        s.node = std::make_unique<Node>(s.options, *s.transport, s.journal);
        s.alive = true;
        s.node->set_observer([this, i](const NodeEvent& e) { observe(i, e); });
        net_.on_delivery(s.name, [this, i] {
            if (slots_[i]->alive) slots_[i]->node->poll(now());
        });
    }

    void observe(std::size_t i, const NodeEvent& e) {
        if (e.kind == NodeEvent::Kind::TxAdmitted) {
            tx_seen_[e.id].emplace(i, net_.now());
        } else if (e.kind == NodeEvent::Kind::BlockConnected) {
            block_seen_[e.id].emplace(i, net_.now());
        }
    }

    void schedule_ticks() {
        tick_ = [this] {
            for (auto& s : slots_) {
                if (s->alive) s->node->tick(now());
            }
            if (net_.now() + kTickMs <= end_ms_) net_.schedule(net_.now() + kTickMs, tick_);
        };
        net_.schedule(kTickMs, tick_);
    }

    Millis pow_delay(std::size_t producers) {
        // Exponential inter-arrival so the whole network averages one block per interval.
        double mean = static_cast<double>(sc_.block_interval_s) * 1000.0 * static_cast<double>(producers);
        double u = static_cast<double>(production_rng_() >> 11) * 0x1.0p-53;
        return std::max<Millis>(1, std::llround(-mean * std::log1p(-u)));
    }

    void schedule_production() {
        std::vector<std::size_t> producers;
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            if (slots_[i]->options.produce) producers.push_back(i);
        }
        if (producers.empty()) return;
        if (sc_.consensus.mode == ConsensusMode::RoundRobinAuthority) {
            authority_ = [this, producers] {
                for (auto i : producers) {
                    if (slots_[i]->alive) slots_[i]->node->try_produce(now());
                }
                Millis next = net_.now() + sc_.block_interval_s * 1000;
                if (next <= production_end_ms_) net_.schedule(next, authority_);
            };
            net_.schedule(sc_.block_interval_s * 1000, authority_);
            return;
        }
        pow_timers_.resize(slots_.size());
        for (auto i : producers) {
            pow_timers_[i] = [this, i, n = producers.size()] {
                if (slots_[i]->alive) slots_[i]->node->try_produce(now());
                Millis next = net_.now() + pow_delay(n);
                if (next <= production_end_ms_) net_.schedule(next, pow_timers_[i]);
            };
            Millis first = pow_delay(producers.size());
            if (first <= production_end_ms_) net_.schedule(first, pow_timers_[i]);
        }
    }

    Slot& slot(const std::string& name) { return *slots_.at(*sc_.index_of(name)); }

    std::uint64_t max_live_height() const {
        std::uint64_t h = 0;
        for (const auto& s : slots_) {
            if (s->alive) h = std::max(h, s->node->height());
        }
        return h;
    }

    Json submit(const ScenarioAction& a, Json result, const Transaction& tx) {
        auto& via = slot(a.via.empty() ? a.node : a.via);
        result["tx_id"] = hex_of(tx.id());
        if (!via.alive) {
            result["result"] = "NodeDown";
            return result;
        }
        auto r = via.node->submit_transaction(tx, now());
        result["result"] = r.accepted ? "Accepted" : r.reason;
        return result;
    }

    Json perform(const ScenarioAction& a) {
        Json result{{"at_s", a.at_s}, {"type", std::string(to_string(a.type))}};
        if (!a.node.empty()) result["node"] = a.node;
        if (!a.via.empty()) result["via"] = a.via;
        if (!a.label.empty()) result["label"] = a.label;
        const UnixSeconds now_s = now() / 1000;
        switch (a.type) {
            case ActionType::SubmitRequest: {
                auto tx = make_signed(sc_.key_of(a.node), ServiceRequestPayload{a.spec, a.tag, now_s + a.due_in_s, a.max_price});
                result = submit(a, result, tx);
                if (result["result"] == "Accepted") labels_[a.label] = tx.id();
                return result;
            }
            case ActionType::Accept:
            case ActionType::Confirm: {
                auto it = labels_.find(a.label);
                if (it == labels_.end()) {
                    result["result"] = "UnknownLabel";
                    return result;
                }
                if (a.type == ActionType::Confirm) {
                    return submit(a, result, make_signed(sc_.key_of(a.node), DeliveryConfirmationPayload{it->second}));
                }
                auto& view = slot(a.via.empty() ? a.node : a.via);
                if (!view.alive) {
                    result["result"] = "NodeDown";
                    return result;
                }
                const auto& requests = view.node->state().requests;
                auto rec = requests.find(it->second);
                if (rec == requests.end()) {
                    result["result"] = "UnknownRequest";
                    return result;
                }
                auto ranked = ranked_offers(rec->second);
                if (a.rank >= ranked.size()) {
                    result["result"] = "NoOffers";
                    result["offers_seen"] = ranked.size();
                    return result;
                }
                result["price"] = ranked[a.rank].offer.quoted_price;
                return submit(a, result,
                              make_signed(sc_.key_of(a.node), OfferAcceptancePayload{it->second, ranked[a.rank].offer_id}));
            }
            case ActionType::Transfer:
                return submit(a, result,
                              make_signed(sc_.key_of(a.node), TransferPayload{slot(a.to).address, a.amount, "sim"}));
            case ActionType::Kill: {
                auto& s = slot(a.node);
                if (!s.alive) {
                    result["result"] = "AlreadyDown";
                    return result;
                }
                s.alive = false;
                s.node.reset();
                net_.set_down(s.name, true);
                result["result"] = "Done";
                faults_.push_back({{"at_s", a.at_s}, {"type", "kill"}, {"node", a.node}, {"live_height", max_live_height()}});
                return result;
            }
            case ActionType::Restart: {
                auto& s = slot(a.node);
                if (s.alive) {
                    result["result"] = "AlreadyRunning";
                    return result;
                }
                net_.set_down(s.name, false);
                try {
                    boot(*sc_.index_of(a.node));
                } catch (const CorruptStore& e) {
                    net_.set_down(s.name, true);
                    result["result"] = "CorruptStore";
                    return result;
                }
                s.node->start(now());
                result["result"] = "Done";
                faults_.push_back({{"at_s", a.at_s}, {"type", "restart"}, {"node", a.node}, {"live_height", max_live_height()}});
                return result;
            }
            case ActionType::Partition:
                net_.partition(a.groups);
                result["result"] = "Done";
                faults_.push_back({{"at_s", a.at_s}, {"type", "partition"}, {"groups", a.groups}});
                return result;
            case ActionType::Heal:
                net_.heal();
                result["result"] = "Done";
                faults_.push_back({{"at_s", a.at_s}, {"type", "heal"}});
                return result;
            case ActionType::InjectInvalid:
                return inject_invalid(a, result);
        }
        return result;
    }

    Json inject_invalid(const ScenarioAction& a, Json result) {
        auto& s = slot(a.node);
        if (!s.alive) {
            result["result"] = "NodeDown";
            return result;
        }
        std::string bytes;
        if (a.invalid_kind == "garbage") {
            bytes = "\x01not a message";
        } else {
            NetMessage msg;
            if (a.invalid_kind == "bad_signature") {
                auto tx = make_signed(s.options.key, TransferPayload{s.address, 1, "forged"});
                std::get<TransferPayload>(tx.payload).amount = 2;
                msg = NetMessage::tx_gossip(sc_.network_id, s.address, tx);
            } else {
                const auto& tip = s.node->tip();
                auto block = assemble_block(tip.block.header, *tip.state, {}, s.address, now() / 1000, genesis_.consensus);
                if (block.header.pow_zero_bits > 0) {
                    while (meets_pow(block.header)) ++block.header.nonce;
                }
                msg = NetMessage::block_gossip(sc_.network_id, s.address, block);
            }
            bytes = msg.encode();
            injected_.push_back({*sc_.index_of(a.node), msg});
        }
        std::size_t sent = 0;
        for (const auto& [id, rec] : s.node->peers().peers()) {
            s.transport->send(rec.endpoint, bytes);
            ++sent;
        }
        result["result"] = "Done";
        result["sent"] = sent;
        return result;
    }

    Json latency_stats(const std::map<Digest256, std::map<std::size_t, Millis>>& seen) const {
        std::vector<Millis> lat;
        std::size_t complete = 0;
        std::size_t alive = 0;
        for (const auto& s : slots_) alive += s->alive ? 1 : 0;
        for (const auto& [id, per_node] : seen) {
            Millis lo = per_node.begin()->second;
            Millis hi = lo;
            for (const auto& [_, t] : per_node) {
                lo = std::min(lo, t);
                hi = std::max(hi, t);
            }
            lat.push_back(hi - lo);
            complete += per_node.size() >= alive ? 1 : 0;
        }
        return {{"count", lat.size()},
                {"reached_all", complete},
                {"p50_ms", percentile(lat, 50)},
                {"p90_ms", percentile(lat, 90)},
                {"max_ms", lat.empty() ? 0 : *std::max_element(lat.begin(), lat.end())}};
    }

    std::string name_of(const Address& a) const {
        auto it = names_.find(a);
        return it == names_.end() ? a.to_string() : it->second;
    }

    Json tamper_drill() {
        auto& s = slot(*sc_.tamper_node);
        Json out{{"node", s.name}};
        std::vector<std::string> lines = s.journal.lines();
        if (lines.empty()) {
            out["result"] = "NoRecords";
            return out;
        }
        std::mt19937_64 rng(sc_.seed ^ 0x7a3c5e1bd2f49687ULL);
        std::size_t index = lines.size() / 2;
        std::string& line = lines[index];
        std::size_t offset = rng() % line.size();
        static constexpr std::string_view alphabet = "0123456789abcdefxyz:,{}\"";
        char replacement = line[offset];
        while (replacement == line[offset]) replacement = alphabet[rng() % alphabet.size()];
        line[offset] = replacement;
        out["record"] = index + 1;
        out["offset"] = offset;

        MemoryJournal copy;
        copy.lines() = lines;
        SimNetwork scratch(SimNetConfig{sc_.seed});
        try {
            Node replay(s.options, scratch.add_endpoint(s.name), copy);
            out["result"] = "Accepted";
        } catch (const CorruptStore& e) {
            out["result"] = "CorruptStore";
            out["failed_record"] = e.line();
        }
        return out;
    }

    SimReport report() {
        Json doc;
        std::vector<Slot*> live;
        for (auto& s : slots_) {
            if (s->alive) live.push_back(s.get());
        }

        Json nodes = Json::object();
        for (auto& s : slots_) {
            Json nj{{"alive", s->alive}, {"role", std::string(to_string(s->options.role))}, {"address", s->address.to_string()}};
            if (s->alive) {
                nj["height"] = s->node->height();
                nj["tip"] = hex_of(s->node->tip_id());
                nj["state_hash"] = hex_of(s->node->state().state_hash());
                nj["mempool"] = s->node->mempool().size();
                nj["peers"] = s->node->peers().size();
                nj["banned"] = s->node->peers().bans().size();
                nj["stored_blocks"] = s->node->store().size();
            }
            nodes[s->name] = std::move(nj);
        }
        doc["nodes"] = std::move(nodes);

        // Convergence: every live node agrees on the block finality_depth below the lowest tip.
        bool converged = !live.empty();
        bool identical = !live.empty();
        std::uint64_t common = 0;
        if (!live.empty()) {
            std::uint64_t h_min = live.front()->node->height();
            for (auto* s : live) h_min = std::min(h_min, s->node->height());
            std::uint64_t depth = sc_.consensus.finality_depth;
            common = h_min > depth ? h_min - depth : 0;
            const auto* ref = live.front()->node->store().ancestor_at(live.front()->node->tip_id(), common);
            for (auto* s : live) {
                const auto* anc = s->node->store().ancestor_at(s->node->tip_id(), common);
                converged = converged && anc && ref && anc->id == ref->id;
                identical = identical && s->node->tip_id() == live.front()->node->tip_id();
            }
        }
        doc["convergence"] = converged;
        doc["identical_tips"] = identical;
        doc["common_height"] = common;

        // Checks over every live node's main chain.
        bool conservation = true;
        bool single_acceptance = true;
        std::vector<std::string> check_notes;
        for (auto* s : live) {
            std::map<Digest256, int> acceptances;
            for (const auto* e : s->node->main_chain()) {
                if (!conservation_holds(*e->state)) {
                    conservation = false;
                    check_notes.push_back("conservation broken at " + s->name + " height " + std::to_string(e->height()));
                }
                for (const auto& tx : e->block.transactions) {
                    if (const auto* acc = tx.as<OfferAcceptancePayload>()) {
                        if (++acceptances[acc->request_id] > 1) {
                            single_acceptance = false;
                            check_notes.push_back("two acceptances for one request on " + s->name);
                        }
                    }
                }
            }
        }

        // No node other than the injector ever sent a rejected message onward.
        bool gate = true;
        if (!injected_.empty()) {
            std::map<Digest256, std::size_t> forbidden;  // payload hash -> injector
            for (const auto& [origin, msg] : injected_) {
                for (std::size_t i = 0; i < slots_.size(); ++i) {
                    if (i == origin) continue;
                    NetMessage copy = msg;
                    copy.sender = slots_[i]->address;
                    forbidden[hash_bytes(copy.encode())] = i;
                }
            }
            for (const auto& e : net_.trace()) {
                if (e.kind != TraceEvent::Kind::Send) continue;
                auto it = forbidden.find(e.payload_hash);
                if (it != forbidden.end() && slots_[it->second]->name == e.from) {
                    gate = false;
                    check_notes.push_back("rejected message forwarded by " + e.from);
                }
            }
        }

        Json faults = Json::array();
        for (auto f : faults_) {
            if (f["type"] == "kill") {
                bool advanced = !live.empty();
                for (auto* s : live) advanced = advanced && s->node->height() > f["live_height"].get<std::uint64_t>();
                f["survivors_advanced"] = advanced;
                Json heights = Json::object();
                for (auto* s : live) heights[s->name] = s->node->height();
                f["survivor_heights"] = heights;
            }
            faults.push_back(std::move(f));
        }
        doc["faults"] = std::move(faults);
        doc["checks"] = {{"conservation", conservation},
                         {"single_acceptance", single_acceptance},
                         {"verification_gate", gate},
                         {"notes", check_notes}};

        Json requests = Json::object();
        Json balances = Json::object();
        if (!live.empty()) {
            const Node& ref = *live.front()->node;
            const LedgerState& st = ref.state();
            doc["reference_node"] = live.front()->name;
            doc["chain"] = {{"height", ref.height()}, {"tip", hex_of(ref.tip_id())}, {"state_hash", hex_of(st.state_hash())}};
            for (const auto& [label, rid] : labels_) {
                Json rj{{"request_id", hex_of(rid)}};
                auto it = st.requests.find(rid);
                if (it == st.requests.end()) {
                    rj["status"] = "UNCONFIRMED";
                } else {
                    const auto& rec = it->second;
                    rj["status"] = std::string(to_string(rec.status));
                    rj["customer"] = name_of(rec.customer);
                    rj["escrow"] = rec.escrow;
                    Json offers = Json::array();
                    for (const auto& c : ranked_offers(rec)) {
                        offers.push_back({{"offer_id", hex_of(c.offer_id)},
                                          {"provider", name_of(c.provider)},
                                          {"price", c.offer.quoted_price},
                                          {"promised_due_date", c.offer.promised_due_date}});
                    }
                    rj["offers"] = std::move(offers);
                    if (rec.accepted_offer) {
                        const auto& o = rec.offers.at(*rec.accepted_offer);
                        rj["accepted"] = {{"offer_id", hex_of(*rec.accepted_offer)},
                                          {"provider", name_of(o.provider)},
                                          {"price", o.offer.quoted_price}};
                    }
                }
                requests[label] = std::move(rj);
            }
            for (const auto& s : slots_) balances[s->name] = st.balance(s->address);
            balances["_supply"] = st.genesis_supply + st.issued_supply;
        }
        doc["requests"] = std::move(requests);
        doc["balances"] = std::move(balances);

        doc["propagation"] = {{"tx", latency_stats(tx_seen_)}, {"block", latency_stats(block_seen_)}};
        std::array<std::size_t, 5> counts{};
        for (const auto& e : net_.trace()) ++counts[static_cast<std::size_t>(e.kind)];
        doc["messages"] = {{"sent", counts[0]}, {"delivered", counts[1]}, {"dropped", counts[2]},
                           {"blocked", counts[3]}, {"lost", counts[4]}};
        doc["actions"] = actions_;
        doc["scenario"] = {{"seed", sc_.seed},
                           {"nodes", sc_.nodes.size()},
                           {"consensus", std::string(to_string(sc_.consensus.mode))},
                           {"duration_s", sc_.duration_s},
                           {"settle_s", sc_.settle_s}};
        if (sc_.tamper_node) doc["tamper"] = tamper_drill();

        SimReport report{std::move(doc)};
        auto violations = check_invariants(report, sc_);
        report.doc["invariants"] = {{"pass", violations.empty()}, {"violations", violations}};
        return report;
    }

    const Scenario& sc_;
    GenesisConfig genesis_;
    SimNetwork net_;
    std::mt19937_64 production_rng_;
    std::vector<std::unique_ptr<Slot>> slots_;
    std::map<Address, std::string> names_;
    std::map<std::string, Digest256> labels_;
    std::map<Digest256, std::map<std::size_t, Millis>> tx_seen_;
    std::map<Digest256, std::map<std::size_t, Millis>> block_seen_;
    std::vector<std::pair<std::size_t, NetMessage>> injected_;
    Json actions_ = Json::array();
    std::vector<Json> faults_;
    std::function<void()> tick_;
    std::function<void()> authority_;
    std::vector<std::function<void()>> pow_timers_;
    Millis end_ms_ = 0;
    Millis production_end_ms_ = 0;
};

}  // namespace

SimReport run_scenario(const Scenario& scenario) {
    scenario.validate();
    Runner runner(scenario);
    return runner.run();
}

std::vector<std::string> check_invariants(const SimReport& report, const Scenario& scenario) {
    std::vector<std::string> v;
    const Json& doc = report.doc;
    const Json& checks = doc.at("checks");
    std::string notes;
    for (const auto& n : checks.at("notes")) notes += (notes.empty() ? "" : "; ") + n.get<std::string>();
    if (!checks.at("conservation").get<bool>()) v.push_back("conservation: " + notes);
    if (!checks.at("single_acceptance").get<bool>()) v.push_back("single acceptance: " + notes);
    if (!checks.at("verification_gate").get<bool>()) v.push_back("verification gate: " + notes);
    if (!doc.at("convergence").get<bool>()) v.push_back("convergence: live nodes disagree below the finality depth");
    if (scenario.consensus.mode == ConsensusMode::ProofOfWork) {
        for (const auto& f : doc.at("faults")) {
            if (f.at("type") == "kill" && !f.at("survivors_advanced").get<bool>()) {
                v.push_back("liveness: survivors did not grow the chain after " + f.at("node").get<std::string>() +
                            " was killed");
            }
        }
    }
    if (scenario.tamper_node) {
        auto it = doc.find("tamper");
        if (it == doc.end() || it->at("result") != "CorruptStore") {
            v.push_back("tamper: mutated store replayed without error");
        }
    }
    return v;
}

}  // namespace chainfab
