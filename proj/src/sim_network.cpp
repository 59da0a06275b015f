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

#include "chainfab/sim_network.hpp"

#include <sstream>
#include <stdexcept>

namespace chainfab {

bool SimTransport::send(const std::string& endpoint, std::string bytes) {
    if (!net_.has_endpoint(endpoint)) return false;
    net_.send_from(name_, endpoint, std::move(bytes));
    return true;
}

std::optional<Datagram> SimTransport::receive() {
    if (inbox_.empty()) return std::nullopt;
    auto d = std::move(inbox_.front());
    inbox_.pop_front();
    return d;
}

SimNetwork::SimNetwork(SimNetConfig config) : config_(config), rng_(config.seed) {
    if (config_.latency_max < config_.latency_min) throw std::invalid_argument("latency_max < latency_min");
    if (config_.drop_probability < 0.0 || config_.drop_probability > 1.0) {
        throw std::invalid_argument("drop probability outside [0, 1]");
    }
}

SimTransport& SimNetwork::add_endpoint(const std::string& name) {
    auto [it, inserted] = endpoints_.emplace(name, std::make_unique<SimTransport>(*this, name));
    if (!inserted) throw std::invalid_argument("duplicate endpoint " + name);
    return *it->second;
}

void SimNetwork::on_delivery(const std::string& name, std::function<void()> handler) { handlers_[name] = std::move(handler); }

void SimNetwork::schedule(Millis at, std::function<void()> fn) {
    if (at < now_) at = now_;
    events_.emplace(std::make_pair(at, seq_++), std::move(fn));
}

void SimNetwork::partition(const std::vector<std::vector<std::string>>& groups) {
    group_of_.clear();
    int g = 1;
    for (const auto& group : groups) {
        for (const auto& name : group) group_of_[name] = g;
        ++g;
    }
    partitioned_ = true;
}

void SimNetwork::heal() {
    partitioned_ = false;
    group_of_.clear();
}

bool SimNetwork::can_reach(const std::string& from, const std::string& to) const {
    if (!partitioned_) return true;
    auto group = [&](const std::string& n) {
        auto it = group_of_.find(n);
        return it == group_of_.end() ? 0 : it->second;
    };
    return group(from) == group(to);
}

void SimNetwork::set_down(const std::string& name, bool down) {
    if (down) {
        down_.insert(name);
        if (auto it = endpoints_.find(name); it != endpoints_.end()) it->second->inbox_.clear();
    } else {
        down_.erase(name);
    }
}

void SimNetwork::record(TraceEvent::Kind kind, const std::string& from, const std::string& to, const std::string& bytes) {
    if (!tracing_) return;
    trace_.push_back(TraceEvent{now_, kind, from, to, hash_bytes(bytes)});
}

void SimNetwork::send_from(const std::string& from, const std::string& to, std::string bytes) {
    if (down_.contains(from)) return;
    record(TraceEvent::Kind::Send, from, to, bytes);
    if (config_.drop_probability > 0.0) {
        double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        if (u < config_.drop_probability) {
            record(TraceEvent::Kind::Drop, from, to, bytes);
            return;
        }
    }
    Millis span = config_.latency_max - config_.latency_min;
    Millis latency = config_.latency_min + (span > 0 ? static_cast<Millis>(rng_() % static_cast<std::uint64_t>(span + 1)) : 0);
    schedule(now_ + latency, [this, from, to, bytes = std::move(bytes)]() mutable {
        if (!can_reach(from, to)) {
            record(TraceEvent::Kind::Blocked, from, to, bytes);
            return;
        }
        if (down_.contains(to)) {
            record(TraceEvent::Kind::Lost, from, to, bytes);
            return;
        }
        record(TraceEvent::Kind::Deliver, from, to, bytes);
        endpoints_.at(to)->inbox_.push_back(Datagram{from, std::move(bytes)});
        if (auto h = handlers_.find(to); h != handlers_.end() && h->second) h->second();
    });
}

bool SimNetwork::step() {
    if (events_.empty()) return false;
    auto node = events_.extract(events_.begin());
    now_ = node.key().first;
    node.mapped()();
    return true;
}

void SimNetwork::run_until(Millis t) {
    while (!events_.empty() && events_.begin()->first.first <= t) step();
    if (now_ < t) now_ = t;
}

std::size_t SimNetwork::run_until_quiescent(std::size_t max_events) {
    std::size_t n = 0;
    while (n < max_events && step()) ++n;
    return n;
}

std::string SimNetwork::trace_text() const {
    static constexpr const char* names[] = {"send", "deliver", "drop", "blocked", "lost"};
    std::ostringstream out;
    for (const auto& e : trace_) {
        out << e.time << ' ' << names[static_cast<int>(e.kind)] << ' ' << e.from << "->" << e.to << ' '
            << e.payload_hash.hex().substr(0, 16) << '\n';
    }
    return out.str();
}

}  // namespace chainfab
