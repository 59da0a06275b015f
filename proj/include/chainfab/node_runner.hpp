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

#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <type_traits>

#include "chainfab/node.hpp"

namespace chainfab {

Millis wall_clock_ms();

class RunnerStopped : public std::runtime_error {
  public:
    RunnerStopped() : std::runtime_error("node is not running") {}
};

struct RunnerTiming {
    Millis tick_ms = 500;
    Millis production_interval_ms = 10'000;
};

/// Owns the thread that drives a Node. P2P readers, API handlers and timers
/// hand it closures through one FIFO queue; only this thread touches the
/// Node.
class NodeRunner {
  public:
    using Clock = std::function<Millis()>;

    NodeRunner(Node& node, RunnerTiming timing = {}, Clock clock = wall_clock_ms);
    ~NodeRunner();
    NodeRunner(const NodeRunner&) = delete;
    NodeRunner& operator=(const NodeRunner&) = delete;

    // Calls node.start and begins the loop.
    void start();
    void stop();
    [[nodiscard]] bool running() const;
    [[nodiscard]] Millis now() const { return clock_(); }

    void post(std::function<void(Node&)> fn);
    // Queues a transport drain.
    void notify_inbound();

    // Runs fn(node, now) on the node thread and waits. Throws RunnerStopped.
    template <typename F>
    auto call(F&& fn) -> std::invoke_result_t<F, Node&, Millis> {
        using R = std::invoke_result_t<F, Node&, Millis>;
        auto task = std::make_shared<std::packaged_task<R(Node&, Millis)>>(std::forward<F>(fn));
        auto result = task->get_future();
        if (!enqueue([task, this](Node& n) { (*task)(n, clock_()); })) throw RunnerStopped();
        return result.get();
    }

  private:
    bool enqueue(std::function<void(Node&)> fn);
    void loop();

    Node& node_;
    RunnerTiming timing_;
    Clock clock_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::function<void(Node&)>> queue_;
    bool running_ = false;
    bool poll_pending_ = false;
    std::thread thread_;
};

}  // namespace chainfab
