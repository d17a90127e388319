#ifndef SOAS_NET_HPP
#define SOAS_NET_HPP

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "soas/errors.hpp"
#include "soas/message.hpp"
#include "soas/text.hpp"

namespace soas::net {

using Clock = std::chrono::steady_clock;
using Deadline = Clock::time_point;

inline Deadline deadline_after(std::int64_t ms) { return Clock::now() + std::chrono::milliseconds(ms); }

inline int remaining_ms(Deadline d) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(d - Clock::now()).count();
    if (left < 0) return 0;
    if (left > std::numeric_limits<int>::max()) return std::numeric_limits<int>::max();
    return static_cast<int>(left);
}

// Internal failure modes; the client layer maps these onto response outcomes.
class NetTimeout : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class NetConnectError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class NetIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
    Socket& operator=(Socket&& o) noexcept {
        if (this != &o) {
            close();
            fd_ = o.fd_;
            o.fd_ = -1;
        }
        return *this;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() { close(); }

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }

    void close() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

    void shutdown() {
        if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
    }

private:
    int fd_ = -1;
};

inline void set_nonblocking(int fd) {
    int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

// Non-blocking connect with a hard deadline. Resolution failures and refused
// connections raise NetConnectError; running out of time raises NetTimeout.
inline Socket connect_to(const HostPort& ep, Deadline deadline) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    std::string port = std::to_string(ep.port);
    if (::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr)
        throw NetConnectError("cannot resolve " + ep.host);
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);

    Socket s(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
    if (!s.valid()) throw NetConnectError("socket() failed");
    set_nonblocking(s.fd());
    int rc = ::connect(s.fd(), res->ai_addr, res->ai_addrlen);
    if (rc != 0) {
        if (errno != EINPROGRESS) throw NetConnectError("connect failed: " + std::string(strerror(errno)));
        pollfd pfd{s.fd(), POLLOUT, 0};
        int pr = ::poll(&pfd, 1, remaining_ms(deadline));
        if (pr == 0) throw NetTimeout("connect timed out");
        if (pr < 0) throw NetConnectError("poll failed during connect");
        int err = 0;
        socklen_t len = sizeof(err);
        ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
        if (err != 0) throw NetConnectError("connect failed: " + std::string(strerror(err)));
    }
    int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return s;
}

inline void send_all(Socket& s, const std::uint8_t* data, std::size_t n, Deadline deadline) {
    std::size_t sent = 0;
    while (sent < n) {
        pollfd pfd{s.fd(), POLLOUT, 0};
        int pr = ::poll(&pfd, 1, remaining_ms(deadline));
        if (pr == 0) throw NetTimeout("send timed out");
        if (pr < 0) throw NetIoError("poll failed during send");
        ssize_t w = ::send(s.fd(), data + sent, n - sent, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
            throw NetIoError("send failed: " + std::string(strerror(errno)));
        }
        sent += static_cast<std::size_t>(w);
    }
}

// ByteReader over a socket with a deadline; used to decode reply frames.
class SocketReader final : public ByteReader {
public:
    SocketReader(Socket& s, Deadline deadline) : s_(s), deadline_(deadline) {}

    std::size_t read(std::uint8_t* dst, std::size_t max) override {
        for (;;) {
            pollfd pfd{s_.fd(), POLLIN, 0};
            int pr = ::poll(&pfd, 1, remaining_ms(deadline_));
            if (pr == 0) throw NetTimeout("receive timed out");
            if (pr < 0) throw NetIoError("poll failed during receive");
            ssize_t r = ::recv(s_.fd(), dst, max, 0);
            if (r > 0) return static_cast<std::size_t>(r);
            if (r == 0) return 0;  // peer closed
            if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
            throw NetIoError("recv failed: " + std::string(strerror(errno)));
        }
    }

private:
    Socket& s_;
    Deadline deadline_;
};

// Blocking reader for server connections: no deadline, but shutdown() on the
// connection socket wakes it so servers can stop promptly.
class BlockingSocketReader final : public ByteReader {
public:
    explicit BlockingSocketReader(Socket& s) : s_(s) {}

    std::size_t read(std::uint8_t* dst, std::size_t max) override {
        for (;;) {
            ssize_t r = ::recv(s_.fd(), dst, max, 0);
            if (r > 0) return static_cast<std::size_t>(r);
            if (r == 0) return 0;
            if (errno == EINTR) continue;
            return 0;  // treat hard errors as end of stream
        }
    }

private:
    Socket& s_;
};

inline void send_frame(Socket& s, const Message& m, Deadline deadline,
                       std::size_t max_frame_bytes = kDefaultMaxFrameBytes) {
    auto bytes = encode_frame(m, max_frame_bytes);
    send_all(s, bytes.data(), bytes.size(), deadline);
}

// Minimal threaded TCP server: one accept thread, one thread per connection.
// stop() shuts every live socket down and joins all threads.
class TcpServer {
public:
    using Handler = std::function<void(Socket&)>;

    TcpServer(const std::string& host, std::uint16_t port, Handler handler)
        : handler_(std::move(handler)) {
        listen_fd_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
        if (!listen_fd_.valid()) throw BindFailure("socket() failed");
        int one = 1;
        ::setsockopt(listen_fd_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
            throw BindFailure("host '" + host + "' is not an IPv4 address");
        if (::bind(listen_fd_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
            throw BindFailure("cannot bind " + host + ":" + std::to_string(port) + ": " +
                              strerror(errno));
        if (::listen(listen_fd_.fd(), 64) != 0) throw BindFailure("listen() failed");
        sockaddr_in bound{};
        socklen_t blen = sizeof(bound);
        ::getsockname(listen_fd_.fd(), reinterpret_cast<sockaddr*>(&bound), &blen);
        endpoint_ = HostPort{host, ntohs(bound.sin_port)};
    }

    ~TcpServer() { stop(); }

    const HostPort& endpoint() const { return endpoint_; }

    void start() {
        accept_thread_ = std::thread([this] { accept_loop(); });
    }

    void stop() {
        bool expected = false;
        if (!stopping_.compare_exchange_strong(expected, true)) {
            if (accept_thread_.joinable()) accept_thread_.join();
            return;
        }
        listen_fd_.shutdown();
        listen_fd_.close();
        {
            std::lock_guard lock(mu_);
            for (auto& c : connections_) c->sock.shutdown();
        }
        if (accept_thread_.joinable()) accept_thread_.join();
        std::vector<std::unique_ptr<Connection>> conns;
        {
            std::lock_guard lock(mu_);
            conns.swap(connections_);
        }
        for (auto& c : conns)
            if (c->thread.joinable()) c->thread.join();
    }

private:
    struct Connection {
        Socket sock;
        std::thread thread;
        std::atomic<bool> done{false};
    };

    void accept_loop() {
        while (!stopping_.load()) {
            sockaddr_in peer{};
            socklen_t plen = sizeof(peer);
            int fd = ::accept(listen_fd_.fd(), reinterpret_cast<sockaddr*>(&peer), &plen);
            if (fd < 0) {
                if (stopping_.load()) break;
                if (errno == EINTR) continue;
                break;
            }
            auto conn = std::make_unique<Connection>();
            conn->sock = Socket(fd);
            Connection* raw = conn.get();
            {
                std::lock_guard lock(mu_);
                reap_locked();
                connections_.push_back(std::move(conn));
            }
            raw->thread = std::thread([this, raw] {
                try {
                    handler_(raw->sock);
                } catch (...) {
                    // a broken connection must not take the server down
                }
                raw->sock.close();
                raw->done.store(true);
            });
        }
    }

    // Joins finished connection threads so long-running servers don't pile
    // them up. Called with mu_ held.
    void reap_locked() {
        for (auto it = connections_.begin(); it != connections_.end();) {
            if ((*it)->done.load()) {
                if ((*it)->thread.joinable()) (*it)->thread.join();
                it = connections_.erase(it);
            } else {
                ++it;
            }
        }
    }

    Socket listen_fd_;
    Handler handler_;
    HostPort endpoint_;
    std::thread accept_thread_;
    std::atomic<bool> stopping_{false};
    std::mutex mu_;
    std::vector<std::unique_ptr<Connection>> connections_;
};

}  // namespace soas::net

#endif
