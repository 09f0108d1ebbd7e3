#include "colma/service/net_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace colma::service {

namespace {

bool is_unix(const std::string& listen) { return listen.rfind("unix:", 0) == 0; }

void write_all(int fd, const std::string& data) {
    size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw NetError(std::string("send failed: ") + std::strerror(errno));
        }
        off += static_cast<size_t>(n);
    }
}

int connect_endpoint(const std::string& endpoint) {
    int fd;
    if (is_unix(endpoint)) {
        std::string path = endpoint.substr(5);
        fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
        if (fd < 0) throw NetError("socket failed");
        sockaddr_un addr{};
        addr.sun_family = AF_UNIX;
        std::strncpy(addr.sun_path, path.c_str(), sizeof(addr.sun_path) - 1);
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
            ::close(fd);
            throw NetError("connect failed: " + path);
        }
    } else {
        auto colon = endpoint.rfind(':');
        if (colon == std::string::npos) throw NetError("endpoint needs host:port");
        std::string host = endpoint.substr(0, colon);
        int port = std::stoi(endpoint.substr(colon + 1));
        fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw NetError("socket failed");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<uint16_t>(port));
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            ::close(fd);
            throw NetError("bad host: " + host);
        }
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
            ::close(fd);
            throw NetError("connect failed: " + endpoint);
        }
    }
    return fd;
}

} // namespace

NetServer::NetServer(ServiceCore& core, std::string listen)
    : core_(core), listen_(std::move(listen)) {}

NetServer::~NetServer() { stop(); }

void NetServer::start() {
    if (running_) return;
    if (is_unix(listen_)) {
        unix_path_ = listen_.substr(5);
        ::unlink(unix_path_.c_str());
        listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw NetError("socket failed");
        sockaddr_un addr{};
        addr.sun_family = AF_UNIX;
        if (unix_path_.size() >= sizeof(addr.sun_path))
            throw NetError("unix socket path too long");
        std::strncpy(addr.sun_path, unix_path_.c_str(), sizeof(addr.sun_path) - 1);
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0)
            throw NetError("bind failed: " + unix_path_ + ": " + std::strerror(errno));
        endpoint_ = listen_;
    } else {
        auto colon = listen_.rfind(':');
        if (colon == std::string::npos) throw NetError("listen needs host:port or unix:path");
        std::string host = listen_.substr(0, colon);
        int port = std::stoi(listen_.substr(colon + 1));
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw NetError("socket failed");
        int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<uint16_t>(port));
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
            throw NetError("bad listen host: " + host);
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0)
            throw NetError("bind failed: " + listen_ + ": " + std::strerror(errno));
        sockaddr_in bound{};
        socklen_t len = sizeof(bound);
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
        endpoint_ = host + ":" + std::to_string(ntohs(bound.sin_port));
    }
    if (::listen(listen_fd_, 64) < 0) throw NetError("listen failed");
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void NetServer::accept_loop() {
    while (running_) {
        // Poll so stop() never waits on a blocked accept.
        pollfd pfd{listen_fd_, POLLIN, 0};
        int ready = ::poll(&pfd, 1, 200);
        if (!running_) break;
        if (ready <= 0) continue;
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break;  // listener closed
        }
        std::lock_guard lk(conn_mu_);
        client_fds_.push_back(fd);
        connections_.emplace_back([this, fd] { serve_connection(fd); });
    }
}

void NetServer::serve_connection(int fd) {
    std::string buffer;
    char chunk[4096];
    while (running_) {
        ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
        if (n <= 0) break;
        buffer.append(chunk, static_cast<size_t>(n));
        size_t pos;
        while ((pos = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            if (line.empty()) continue;
            kb::Json resp = core_.dispatch_line(line);
            try {
                write_all(fd, resp.dump() + "\n");
            } catch (const NetError&) {
                ::close(fd);
                return;
            }
        }
    }
    ::close(fd);
}

void NetServer::stop() {
    if (!running_) return;
    running_ = false;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
    {
        std::lock_guard lk(conn_mu_);
        for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    std::lock_guard lk(conn_mu_);
    for (auto& t : connections_)
        if (t.joinable()) t.join();
    connections_.clear();
    client_fds_.clear();
    if (!unix_path_.empty()) ::unlink(unix_path_.c_str());
}

LineClient::LineClient(const std::string& endpoint) : fd_(connect_endpoint(endpoint)) {}

LineClient::~LineClient() {
    if (fd_ >= 0) ::close(fd_);
}

std::string LineClient::call_raw(const std::string& line) {
    write_all(fd_, line + "\n");
    char chunk[4096];
    while (buffer_.find('\n') == std::string::npos) {
        ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
        if (n <= 0) throw NetError("connection closed");
        buffer_.append(chunk, static_cast<size_t>(n));
    }
    size_t pos = buffer_.find('\n');
    std::string resp = buffer_.substr(0, pos);
    buffer_.erase(0, pos + 1);
    return resp;
}

kb::Json LineClient::call(const kb::Json& request) {
    return kb::Json::parse(call_raw(request.dump()));
}

} // namespace colma::service
