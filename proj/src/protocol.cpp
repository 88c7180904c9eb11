#include "advml/protocol.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <istream>
#include <ostream>

#include "advml/errors.hpp"

namespace advml {

using nlohmann::json;

namespace {

json error_response(std::string_view kind, std::string_view message) {
    return json{{"error", kind}, {"message", message}};
}

Label label_field(const json& request) {
    auto it = request.find("label");
    if (it == request.end() || !it->is_number_integer()) throw InputError("label must be 1 or 2");
    auto label = label_from_int(it->get<long long>());
    if (!label) throw InputError("label must be 1 or 2");
    return *label;
}

std::string text_field(const json& request) {
    auto it = request.find("text");
    if (it == request.end() || !it->is_string()) throw InputError("text must be a string");
    return it->get<std::string>();
}

bool send_all(int fd, std::string_view data) {
    while (!data.empty()) {
        ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

// Reads one '\n'-terminated line, keeping any surplus in `buffer`.
bool recv_line(int fd, std::string& buffer, std::string& line) {
    for (;;) {
        auto nl = buffer.find('\n');
        if (nl != std::string::npos) {
            line = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            return true;
        }
        char chunk[4096];
        ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
}

} // namespace

json handle_request(Oracle& oracle, const json& request) {
    if (!request.is_object() || !request.contains("op") || !request["op"].is_string())
        return error_response("bad_request", "request must be an object with a string 'op'");
    const auto op = request["op"].get<std::string>();
    try {
        if (op == "classify") return json{{"label", to_int(oracle.classify(text_field(request)))}};
        if (op == "feedback") {
            oracle.submit_feedback(text_field(request), label_field(request));
            return json{{"ok", true}};
        }
        if (op == "retrain") {
            oracle.retrain();
            return json{{"ok", true}};
        }
        if (op == "advance_day") return json{{"day", oracle.advance_day()}};
        if (op == "stats") {
            const auto s = oracle.stats();
            return json{{"calls_used_today", s.calls_used_today},
                        {"calls_per_day", s.calls_per_day},
                        {"day", s.day},
                        {"total_calls", s.total_calls}};
        }
        if (op == "reset") {
            oracle.reset();
            return json{{"ok", true}};
        }
    } catch (const RateLimitedError& e) {
        return json{{"error", "rate_limited"}, {"retry_after_days", e.retry_after_days()}};
    } catch (const InputError& e) {
        return error_response("invalid_input", e.what());
    }
    return error_response("bad_request", "unknown op '" + op + "'");
}

std::string handle_line(Oracle& oracle, std::string_view line) {
    json request = json::parse(line, nullptr, false);
    json response = request.is_discarded() ? error_response("bad_request", "malformed JSON")
                                           : handle_request(oracle, request);
    return response.dump(-1, ' ', false, json::error_handler_t::replace);
}

void serve_stream(Oracle& oracle, std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out << handle_line(oracle, line) << '\n' << std::flush;
    }
}

OracleServer::OracleServer(Oracle& oracle, std::uint16_t port, const std::string& host) : oracle_(oracle) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw ProtocolError(std::string("socket: ") + std::strerror(errno));
    int yes = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        throw ProtocolError("bad listen address " + host);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 16) < 0) {
        const std::string err = std::strerror(errno);
        ::close(listen_fd_);
        throw ProtocolError("bind/listen: " + err);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    acceptor_ = std::thread([this] { accept_loop(); });
}

OracleServer::~OracleServer() { stop(); }

void OracleServer::stop() {
    if (stopping_.exchange(true)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (acceptor_.joinable()) acceptor_.join();
    {
        std::lock_guard lock(clients_mutex_);
        for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    for (auto& t : client_threads_) t.join();
    client_threads_.clear();
}

void OracleServer::wait() {
    while (!stopping_) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

void OracleServer::accept_loop() {
    while (!stopping_) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            return;
        }
        int yes = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
        std::lock_guard lock(clients_mutex_);
        client_fds_.insert(fd);
        client_threads_.emplace_back([this, fd] { serve_client(fd); });
    }
}

void OracleServer::serve_client(int fd) {
    std::string buffer, line;
    while (recv_line(fd, buffer, line)) {
        if (line.empty()) continue;
        if (!send_all(fd, handle_line(oracle_, line) + "\n")) break;
    }
    std::lock_guard lock(clients_mutex_);
    client_fds_.erase(fd);
    ::close(fd);
}

RemoteOracle::RemoteOracle(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || res == nullptr)
        throw ProtocolError("cannot resolve " + host);
    fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    const bool ok = fd_ >= 0 && ::connect(fd_, res->ai_addr, res->ai_addrlen) == 0;
    ::freeaddrinfo(res);
    if (!ok) {
        if (fd_ >= 0) ::close(fd_);
        throw ProtocolError("cannot connect to " + host + ":" + std::to_string(port));
    }
    int yes = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
}

RemoteOracle::~RemoteOracle() {
    if (fd_ >= 0) ::close(fd_);
}

std::pair<std::string, std::uint16_t> RemoteOracle::parse_address(std::string_view address) {
    auto colon = address.rfind(':');
    if (colon == std::string_view::npos || colon == 0) throw InputError("address must be HOST:PORT");
    const std::string port_text(address.substr(colon + 1));
    unsigned long port = 0;
    try {
        std::size_t used = 0;
        port = std::stoul(port_text, &used);
        if (used != port_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
        throw InputError("bad port in '" + std::string(address) + "'");
    }
    if (port == 0 || port > 65535) throw InputError("port out of range");
    return {std::string(address.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

json RemoteOracle::call(const json& request) {
    if (!send_all(fd_, request.dump(-1, ' ', false, json::error_handler_t::replace) + "\n")) throw ProtocolError("send failed");
    std::string line;
    if (!recv_line(fd_, buffer_, line)) throw ProtocolError("connection closed by oracle");
    json response = json::parse(line, nullptr, false);
    if (response.is_discarded() || !response.is_object()) throw ProtocolError("malformed response");
    if (auto it = response.find("error"); it != response.end()) {
        const auto kind = it->get<std::string>();
        if (kind == "rate_limited") throw RateLimitedError(response.value("retry_after_days", 1));
        const auto message = response.value("message", kind);
        if (kind == "invalid_input") throw InputError(message);
        throw ProtocolError(message);
    }
    return response;
}

Label RemoteOracle::classify(std::string_view text) {
    auto r = call(json{{"op", "classify"}, {"text", text}});
    auto label = r.contains("label") && r["label"].is_number_integer() ? label_from_int(r["label"].get<long long>())
                                                                       : std::nullopt;
    if (!label) throw ProtocolError("classify response lacks a valid label");
    return *label;
}

void RemoteOracle::submit_feedback(std::string_view text, Label label) {
    call(json{{"op", "feedback"}, {"text", text}, {"label", to_int(label)}});
}

void RemoteOracle::retrain() { call(json{{"op", "retrain"}}); }

std::int64_t RemoteOracle::advance_day() { return call(json{{"op", "advance_day"}}).at("day").get<std::int64_t>(); }

OracleStats RemoteOracle::stats() {
    auto r = call(json{{"op", "stats"}});
    return OracleStats{r.at("calls_used_today").get<std::size_t>(), r.at("calls_per_day").get<std::size_t>(),
                       r.value("day", std::int64_t{0}), r.value("total_calls", std::uint64_t{0})};
}

void RemoteOracle::reset() { call(json{{"op", "reset"}}); }

} // namespace advml
