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

#include <memory>
#include <string>

#include "chainfab/node_runner.hpp"

namespace chainfab {

struct ApiOptions {
    // POST /wallet and unsigned {"from": ...} writes, loopback clients only.
    bool local_wallet = true;
};

// JSON shape shared by /requests and /requests/{id}; offers in selection order.
Json request_json(const Digest256& id, const RequestRecord& record);

/// HTTP+JSON surface of one node. Every handler runs on the node thread via
/// NodeRunner::call, so responses are consistent snapshots.
class ApiServer {
  public:
    explicit ApiServer(NodeRunner& runner, ApiOptions options = {});
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Binds host:port (0 picks a free port) and serves on a background
    // thread. Returns the bound port; throws std::runtime_error.
    int start(const std::string& host, int port);
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace chainfab
