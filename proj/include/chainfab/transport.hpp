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
#include <string>

namespace chainfab {

struct Datagram {
    std::string endpoint;  // where it came from; replies go back here
    std::string bytes;
};

/// Message-oriented link layer shared by the socket transport and the
/// simulator. Each send carries one complete canonical message.
class Transport {
  public:
    virtual ~Transport() = default;

    // false when the bytes could not be handed to the link.
    virtual bool send(const std::string& endpoint, std::string bytes) = 0;
    // Non-blocking.
    virtual std::optional<Datagram> receive() = 0;
    [[nodiscard]] virtual std::string local_endpoint() const = 0;
};

}  // namespace chainfab
