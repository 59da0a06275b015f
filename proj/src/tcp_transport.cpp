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

#include "chainfab/tcp_transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <system_error>

#include "chainfab/net_message.hpp"

namespace chainfab {

namespace {

std::system_error sys_error(const std::string& what) { return {errno, std::generic_category(), what}; }

bool write_all(int fd, std::string_view data) {
    while (!data.empty()) {
        ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

std::string peer_name(const sockaddr_storage& addr) {
    char host[INET6_ADDRSTRLEN] = {};
    std::uint16_t port = 0;
    if (addr.ss_family == AF_INET) {
        const auto* a = reinterpret_cast<const sockaddr_in*>(&addr);
        inet_ntop(AF_INET, &a->sin_addr, host, sizeof host);
        port = ntohs(a->sin_port);
    } else {
        const auto* a = reinterpret_cast<const sockaddr_in6*>(&addr);
        inet_ntop(AF_INET6, &a->sin6_addr, host, sizeof host);
        port = ntohs(a->sin6_port);
    }
    return std::string(host) + ":" + std::to_string(port);
}

}  // namespace

TcpTransport::TcpTransport(std::string listen, std::string advertise)
    : listen_(parse_host_port(listen)), advertise_(std::move(advertise)) {}

TcpTransport::~TcpTransport() { stop(); }

void TcpTransport::start() {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    std::string port = std::to_string(listen_.port);
    if (int rc = getaddrinfo(listen_.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
        throw std::system_error(EINVAL, std::generic_category(), "resolve " + listen_.to_string() + ": " + gai_strerror(rc));
    }
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
        freeaddrinfo(res);
        throw sys_error("socket");
    }
    int one = 1;
    setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 64) != 0) {
        auto err = sys_error("bind " + listen_.to_string());
        freeaddrinfo(res);
        ::close(fd);
        throw err;
    }
    freeaddrinfo(res);
    sockaddr_storage bound{};
    socklen_t len = sizeof bound;
    getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = bound.ss_family == AF_INET ? ntohs(reinterpret_cast<sockaddr_in*>(&bound)->sin_port)
                                       : ntohs(reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port);
    listen_fd_ = fd;
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
}

void TcpTransport::stop() {
    if (!running_.exchange(false)) return;
    if (acceptor_.joinable()) acceptor_.join();
    ::close(listen_fd_);
    listen_fd_ = -1;
    std::vector<std::pair<std::shared_ptr<Connection>, std::thread>> readers;
    {
        std::lock_guard lock(mu_);
        for (auto& [_, c] : conns_) ::shutdown(c->fd, SHUT_RDWR);
        readers.swap(readers_);
    }
    for (auto& [_, t] : readers) t.join();
    std::lock_guard lock(mu_);
    conns_.clear();
}

std::string TcpTransport::local_endpoint() const {
    if (!advertise_.empty()) return advertise_;
    return listen_.host + ":" + std::to_string(port_ ? port_ : listen_.port);
}

void TcpTransport::set_on_receive(std::function<void()> fn) {
    std::lock_guard lock(mu_);
    on_receive_ = std::move(fn);
}

void TcpTransport::accept_loop() {
    while (running_) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        if (::poll(&pfd, 1, 100) <= 0) continue;
        sockaddr_storage addr{};
        socklen_t len = sizeof addr;
        int fd = ::accept(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        if (fd < 0) continue;
        int one = 1;
        setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        auto conn = std::make_shared<Connection>();
        conn->fd = fd;
        conn->key = peer_name(addr);
        adopt(conn);
    }
}

void TcpTransport::adopt(std::shared_ptr<Connection> conn) {
    std::lock_guard lock(mu_);
    if (!running_) {
        ::close(conn->fd);
        return;
    }
    if (auto it = conns_.find(conn->key); it != conns_.end()) ::shutdown(it->second->fd, SHUT_RDWR);
    for (auto it = readers_.begin(); it != readers_.end();) {
        if (it->first->finished) {
            it->second.join();
            it = readers_.erase(it);
        } else {
            ++it;
        }
    }
    conns_[conn->key] = conn;
    readers_.emplace_back(conn, std::thread([this, conn] { read_loop(conn); }));
}

void TcpTransport::drop(const std::shared_ptr<Connection>& conn) {
    conn->closed = true;
    ::shutdown(conn->fd, SHUT_RDWR);
    std::lock_guard lock(mu_);
    if (auto it = conns_.find(conn->key); it != conns_.end() && it->second == conn) conns_.erase(it);
}

void TcpTransport::read_loop(std::shared_ptr<Connection> conn) {
    FrameDecoder decoder;
    char buf[64 * 1024];
    while (true) {
        ssize_t n = ::recv(conn->fd, buf, sizeof buf, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        try {
            decoder.feed(std::string_view(buf, static_cast<std::size_t>(n)));
            bool any = false;
            while (auto frame = decoder.next()) {
                std::lock_guard lock(mu_);
                inbox_.push_back({conn->key, std::move(*frame)});
                any = true;
            }
            if (any) {
                std::function<void()> cb;
                {
                    std::lock_guard lock(mu_);
                    cb = on_receive_;
                }
                if (cb) cb();
            }
        } catch (const FrameError&) {
            break;
        }
    }
    drop(conn);
    {
        std::lock_guard wl(conn->write_mu);
        ::close(conn->fd);
    }
    conn->finished = true;
}

std::shared_ptr<TcpTransport::Connection> TcpTransport::connect_to(const std::string& endpoint) {
    HostPort hp;
    try {
        hp = parse_host_port(endpoint);
    } catch (const ConfigError&) {
        return nullptr;
    }
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    std::string port = std::to_string(hp.port);
    if (getaddrinfo(hp.host.c_str(), port.c_str(), &hints, &res) != 0) return nullptr;
    int fd = -1;
    for (auto* ai = res; ai && fd < 0; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        int flags = fcntl(fd, F_GETFL, 0);
        fcntl(fd, F_SETFL, flags | O_NONBLOCK);
        int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
        if (rc != 0 && errno == EINPROGRESS) {
            pollfd pfd{fd, POLLOUT, 0};
            int err = 0;
            socklen_t len = sizeof err;
            if (::poll(&pfd, 1, kConnectTimeoutMs) == 1 && getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len) == 0 && err == 0) {
                rc = 0;
            }
        }
        if (rc != 0) {
            ::close(fd);
            fd = -1;
            continue;
        }
        fcntl(fd, F_SETFL, flags);
    }
    freeaddrinfo(res);
    if (fd < 0) return nullptr;
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto conn = std::make_shared<Connection>();
    conn->fd = fd;
    conn->key = endpoint;
    adopt(conn);
    return conn;
}

bool TcpTransport::send(const std::string& endpoint, std::string bytes) {
    if (!running_ || bytes.size() > kMaxFrameBytes) return false;
    std::shared_ptr<Connection> conn;
    {
        std::lock_guard lock(mu_);
        if (auto it = conns_.find(endpoint); it != conns_.end()) conn = it->second;
    }
    if (!conn) conn = connect_to(endpoint);
    if (!conn) return false;
    std::string frame = encode_frame(bytes);
    std::lock_guard wl(conn->write_mu);
    if (conn->closed || !write_all(conn->fd, frame)) {
        drop(conn);
        return false;
    }
    return true;
}

std::optional<Datagram> TcpTransport::receive() {
    std::lock_guard lock(mu_);
    if (inbox_.empty()) return std::nullopt;
    Datagram d = std::move(inbox_.front());
    inbox_.pop_front();
    return d;
}

}  // namespace chainfab
