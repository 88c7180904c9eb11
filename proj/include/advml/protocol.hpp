#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

#include "advml/oracle.hpp"

namespace advml {

// Newline-delimited JSON, one request object per line, one response per line.
//
//   {"op":"classify","text":"..."}          -> {"label":1|2}
//                                             | {"error":"rate_limited","retry_after_days":1}
//   {"op":"feedback","text":"...","label":n} -> {"ok":true}
//   {"op":"retrain"}                         -> {"ok":true}
//   {"op":"advance_day"}                     -> {"day":n}
//   {"op":"stats"}                           -> {"calls_used_today":..,"calls_per_day":..,"day":..,"total_calls":..}
//   {"op":"reset"}                           -> {"ok":true}
//
// Malformed requests get {"error":"invalid_input"|"bad_request","message":"..."}.
nlohmann::json handle_request(Oracle& oracle, const nlohmann::json& request);
std::string handle_line(Oracle& oracle, std::string_view line);

// Serves requests read from `in` until end of stream.
void serve_stream(Oracle& oracle, std::istream& in, std::ostream& out);

// TCP front end on a background thread; one thread per client connection.
class OracleServer {
public:
    // Port 0 binds an ephemeral port; see port().
    OracleServer(Oracle& oracle, std::uint16_t port = 0, const std::string& host = "127.0.0.1");
    ~OracleServer();

    OracleServer(const OracleServer&) = delete;
    OracleServer& operator=(const OracleServer&) = delete;

    std::uint16_t port() const { return port_; }
    void stop();
    // Blocks until stop() is called from another thread.
    void wait();

private:
    void accept_loop();
    void serve_client(int fd);

    Oracle& oracle_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread acceptor_;
    std::mutex clients_mutex_;
    std::set<int> client_fds_;
    std::vector<std::thread> client_threads_;
};

// Client side of the wire protocol.
class RemoteOracle final : public Oracle {
public:
    RemoteOracle(const std::string& host, std::uint16_t port);
    ~RemoteOracle() override;

    RemoteOracle(const RemoteOracle&) = delete;
    RemoteOracle& operator=(const RemoteOracle&) = delete;

    Label classify(std::string_view text) override;
    void submit_feedback(std::string_view text, Label label) override;
    void retrain() override;
    std::int64_t advance_day() override;
    OracleStats stats() override;
    void reset() override;

    // Splits "HOST:PORT".
    static std::pair<std::string, std::uint16_t> parse_address(std::string_view address);

private:
    nlohmann::json call(const nlohmann::json& request);

    int fd_ = -1;
    std::string buffer_;
};

} // namespace advml
