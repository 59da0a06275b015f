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

#include "chainfab/node_service.hpp"

#include <filesystem>
#include <ostream>

namespace chainfab {

namespace {

std::string_view event_name(NodeEvent::Kind k) {
    switch (k) {
        case NodeEvent::Kind::TxAdmitted: return "tx";
        case NodeEvent::Kind::BlockConnected: return "block";
        case NodeEvent::Kind::TipChanged: return "tip";
        case NodeEvent::Kind::PeerPenalized: return "penalty";
        case NodeEvent::Kind::HandshakeFailed: return "handshake";
        case NodeEvent::Kind::SyncFinished: return "sync";
    }
    return "event";
}

}  // namespace

NodeService::NodeService(const NodeConfig& config, std::ostream* log) : config_(config), log_(log) {
    auto genesis = config_.load_genesis();
    auto key = config_.load_or_create_key();
    auto options = config_.to_options(genesis, key);
    std::filesystem::create_directories(config_.data_dir);
    journal_ = std::make_unique<FileJournal>(config_.journal_dir());
    transport_ = std::make_unique<TcpTransport>(config_.p2p_listen, options.listen);
    node_ = std::make_unique<Node>(options, *transport_, *journal_);
    if (log_) {
        node_->set_observer([this](const NodeEvent& e) {
            *log_ << event_name(e.kind) << ' ' << (e.id.is_zero() ? std::string("-") : e.id.hex().substr(0, 16));
            if (!e.detail.empty()) *log_ << ' ' << e.detail;
            *log_ << std::endl;
        });
    }
    runner_ = std::make_unique<NodeRunner>(*node_, RunnerTiming{500, config_.production_interval_ms});
    api_ = std::make_unique<ApiServer>(*runner_, ApiOptions{config_.local_wallet});
}

NodeService::~NodeService() { stop(); }

void NodeService::start() {
    transport_->start();
    transport_->set_on_receive([this] { runner_->notify_inbound(); });
    runner_->start();
    auto api = parse_host_port(config_.api_listen);
    api_port_ = api_->start(api.host, api.port);
    if (log_) {
        *log_ << "node " << node_->address().to_string() << " p2p " << config_.p2p_listen << " (port " << transport_->port()
              << ") api " << api.host << ":" << api_port_ << " height " << node_->height() << std::endl;
    }
}

void NodeService::stop() {
    if (api_) api_->stop();
    if (transport_) transport_->set_on_receive(nullptr);
    if (runner_) runner_->stop();
    if (transport_) transport_->stop();
}

}  // namespace chainfab
