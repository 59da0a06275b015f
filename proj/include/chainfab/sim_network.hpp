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

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "chainfab/crypto.hpp"
#include "chainfab/transport.hpp"

namespace chainfab {

using Millis = std::int64_t;

struct SimNetConfig {
    std::uint64_t seed = 42;
    Millis latency_min = 0;
    Millis latency_max = 0;
    double drop_probability = 0.0;
};

struct TraceEvent {
    enum class Kind { Send, Deliver, Drop, Blocked, Lost };
    Millis time = 0;
    Kind kind = Kind::Send;
    std::string from;
    std::string to;
    Digest256 payload_hash;
};

class SimNetwork;

class SimTransport final : public Transport {
  public:
    SimTransport(SimNetwork& net, std::string name) : net_(net), name_(std::move(name)) {}

    bool send(const std::string& endpoint, std::string bytes) override;
    std::optional<Datagram> receive() override;
    [[nodiscard]] std::string local_endpoint() const override { return name_; }

  private:
    friend class SimNetwork;
    SimNetwork& net_;
    std::string name_;
    std::deque<Datagram> inbox_;
};

/// Deterministic discrete-event network. One virtual clock, one seeded RNG,
/// events ordered by (time, insertion sequence). Single-threaded.
class SimNetwork {
  public:
    explicit SimNetwork(SimNetConfig config);

    SimTransport& add_endpoint(const std::string& name);
    [[nodiscard]] bool has_endpoint(const std::string& name) const { return endpoints_.contains(name); }

    // Called after each delivery into name's inbox.
    void on_delivery(const std::string& name, std::function<void()> handler);

    void schedule(Millis at, std::function<void()> fn);

    // Messages crossing group boundaries are discarded until heal().
    // Endpoints not listed form one extra group.
    void partition(const std::vector<std::vector<std::string>>& groups);
    void heal();
    [[nodiscard]] bool can_reach(const std::string& from, const std::string& to) const;

    // Deliveries to a down endpoint are lost.
    void set_down(const std::string& name, bool down);
    [[nodiscard]] bool is_down(const std::string& name) const { return down_.contains(name); }

    bool step();
    void run_until(Millis t);
    // Runs until no events remain or max_events were processed.
    std::size_t run_until_quiescent(std::size_t max_events = 50'000'000);

    [[nodiscard]] Millis now() const { return now_; }
    [[nodiscard]] std::size_t pending() const { return events_.size(); }
    [[nodiscard]] const std::vector<TraceEvent>& trace() const { return trace_; }
    [[nodiscard]] std::string trace_text() const;
    void set_tracing(bool on) { tracing_ = on; }

    std::mt19937_64& rng() { return rng_; }

  private:
    friend class SimTransport;
    void send_from(const std::string& from, const std::string& to, std::string bytes);
    void record(TraceEvent::Kind kind, const std::string& from, const std::string& to, const std::string& bytes);

    SimNetConfig config_;
    std::mt19937_64 rng_;
    Millis now_ = 0;
    std::uint64_t seq_ = 0;
    std::map<std::pair<Millis, std::uint64_t>, std::function<void()>> events_;
    std::map<std::string, std::unique_ptr<SimTransport>> endpoints_;
    std::map<std::string, std::function<void()>> handlers_;
    std::map<std::string, int> group_of_;
    bool partitioned_ = false;
    std::set<std::string> down_;
    std::vector<TraceEvent> trace_;
    bool tracing_ = true;
};

}  // namespace chainfab
