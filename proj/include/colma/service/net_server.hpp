#pragma once
// Newline-delimited JSON over a stream socket (unix domain or TCP).
// One response line per request line; malformed JSON earns an error
// response and the connection stays open.

#include "colma/service/service.hpp"

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace colma::service {

struct NetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class NetServer {
public:
    // listen: "unix:<path>" or "<host>:<port>" (port 0 = ephemeral).
    NetServer(ServiceCore& core, std::string listen);
    ~NetServer();

    void start();
    void stop();

    // Resolved endpoint (actual TCP port / socket path).
    const std::string& endpoint() const { return endpoint_; }

private:
    void accept_loop();
    void serve_connection(int fd);

    ServiceCore& core_;
    std::string listen_;
    std::string endpoint_;
    int listen_fd_ = -1;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::mutex conn_mu_;
    std::vector<std::thread> connections_;
    std::vector<int> client_fds_;
    std::string unix_path_;  // unlinked on stop
};

// Minimal blocking client for tests and the CLI.
class LineClient {
public:
    explicit LineClient(const std::string& endpoint);  // same syntax as listen
    ~LineClient();
    kb::Json call(const kb::Json& request);
    std::string call_raw(const std::string& line);  // sends line + '\n'

private:
    int fd_ = -1;
    std::string buffer_;
};

} // namespace colma::service
