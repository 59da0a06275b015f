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

#include <iosfwd>
#include <memory>

#include "chainfab/api_server.hpp"
#include "chainfab/node_config.hpp"
#include "chainfab/node_runner.hpp"
#include "chainfab/tcp_transport.hpp"

namespace chainfab {

/// A configured node process: file journal, TCP transport, runner thread and
/// REST API wired together.
class NodeService {
  public:
    // Replays the journal (may throw CorruptStore) and validates the config.
    explicit NodeService(const NodeConfig& config, std::ostream* log = nullptr);
    ~NodeService();

    void start();
    void stop();

    [[nodiscard]] int api_port() const { return api_port_; }
    [[nodiscard]] std::uint16_t p2p_port() const { return transport_->port(); }
    [[nodiscard]] NodeRunner& runner() { return *runner_; }
    [[nodiscard]] bool dropped_partial_record() const { return journal_->dropped_partial_record(); }

  private:
    NodeConfig config_;
    std::ostream* log_;
    std::unique_ptr<FileJournal> journal_;
    std::unique_ptr<TcpTransport> transport_;
    std::unique_ptr<Node> node_;
    std::unique_ptr<NodeRunner> runner_;
    std::unique_ptr<ApiServer> api_;
    int api_port_ = 0;
};

}  // namespace chainfab
