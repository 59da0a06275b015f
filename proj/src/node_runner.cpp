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

#include "chainfab/node_runner.hpp"

#include <chrono>

namespace chainfab {

Millis wall_clock_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

NodeRunner::NodeRunner(Node& node, RunnerTiming timing, Clock clock)
    : node_(node), timing_(timing), clock_(std::move(clock)) {}

NodeRunner::~NodeRunner() { stop(); }

void NodeRunner::start() {
    std::lock_guard lock(mu_);
    if (running_) return;
    running_ = true;
    node_.start(clock_());
    thread_ = std::thread([this] { loop(); });
}

void NodeRunner::stop() {
    {
        std::lock_guard lock(mu_);
        if (!running_) return;
        running_ = false;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
    // Closures still queued hold promises; running them keeps callers from hanging.
    std::deque<std::function<void(Node&)>> rest;
    {
        std::lock_guard lock(mu_);
        rest.swap(queue_);
    }
    for (auto& fn : rest) fn(node_);
}

bool NodeRunner::running() const {
    std::lock_guard lock(mu_);
    return running_;
}

bool NodeRunner::enqueue(std::function<void(Node&)> fn) {
    {
        std::lock_guard lock(mu_);
        if (!running_) return false;
        queue_.push_back(std::move(fn));
    }
    cv_.notify_one();
    return true;
}

void NodeRunner::post(std::function<void(Node&)> fn) { (void)enqueue(std::move(fn)); }

void NodeRunner::notify_inbound() {
    {
        std::lock_guard lock(mu_);
        if (!running_ || poll_pending_) return;
        poll_pending_ = true;
        queue_.push_back([this](Node& n) {
            {
                std::lock_guard inner(mu_);
                poll_pending_ = false;
            }
            n.poll(clock_());
        });
    }
    cv_.notify_one();
}

void NodeRunner::loop() {
    Millis next_tick = clock_() + timing_.tick_ms;
    Millis next_block = clock_() + timing_.production_interval_ms;
    std::unique_lock lock(mu_);
    while (running_) {
        Millis now = clock_();
        if (queue_.empty() && now < std::min(next_tick, next_block)) {
            cv_.wait_for(lock, std::chrono::milliseconds(std::min(next_tick, next_block) - now));
            continue;
        }
        std::deque<std::function<void(Node&)>> batch;
        batch.swap(queue_);
        lock.unlock();
        for (auto& fn : batch) {
            try {
                fn(node_);
            } catch (const std::exception&) {
                // post() callers get no result channel; call() callers see it through their future.
            }
        }
        now = clock_();
        if (now >= next_tick) {
            node_.tick(now);
            next_tick = now + timing_.tick_ms;
        }
        if (now >= next_block) {
            node_.try_produce(now);
            next_block = clock_() + timing_.production_interval_ms;
        }
        lock.lock();
    }
}

}  // namespace chainfab
