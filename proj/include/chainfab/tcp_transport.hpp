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

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "chainfab/node_config.hpp"
#include "chainfab/transport.hpp"

namespace chainfab {

/// Length-prefixed frames over TCP. Outbound connections are keyed by the
/// dialled "host:port"; inbound ones by the remote "ip:port". A listener
/// thread accepts and one reader thread per connection fills the inbox.
class TcpTransport final : public Transport {
  public:
    TcpTransport(std::string listen, std::string advertise = {});
    ~TcpTransport() override;
    TcpTransport(const TcpTransport&) = delete;
    TcpTransport& operator=(const TcpTransport&) = delete;

    // Binds and starts accepting. Throws std::system_error.
    void start();
    void stop();
    [[nodiscard]] std::uint16_t port() const { return port_; }

    bool send(const std::string& endpoint, std::string bytes) override;
    std::optional<Datagram> receive() override;
    [[nodiscard]] std::string local_endpoint() const override;

    // Called from reader threads after a frame lands in the inbox.
    void set_on_receive(std::function<void()> fn);

    static constexpr int kConnectTimeoutMs = 1500;

  private:
    struct Connection {
        int fd = -1;
        std::string key;
        std::mutex write_mu;
        std::atomic<bool> closed{false};
        std::atomic<bool> finished{false};
    };

    void accept_loop();
    void read_loop(std::shared_ptr<Connection> conn);
    std::shared_ptr<Connection> connect_to(const std::string& endpoint);
    void adopt(std::shared_ptr<Connection> conn);
    void drop(const std::shared_ptr<Connection>& conn);

    HostPort listen_;
    std::string advertise_;
    std::uint16_t port_ = 0;
    int listen_fd_ = -1;
    std::atomic<bool> running_{false};
    std::thread acceptor_;

    std::mutex mu_;
    std::map<std::string, std::shared_ptr<Connection>> conns_;
    std::vector<std::pair<std::shared_ptr<Connection>, std::thread>> readers_;
    std::deque<Datagram> inbox_;
    std::function<void()> on_receive_;
};

}  // namespace chainfab
