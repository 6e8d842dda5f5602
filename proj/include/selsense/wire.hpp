#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "selsense/coordinator.hpp"

namespace selsense {

// Wire form of the coordinator protocol: one UTF-8 JSON object per line.
// Types: REGISTER, ASSIGN, BATCH, ACK, REPORT (plus ERROR responses).
std::string batch_to_wire(const DataBatch& batch);
DataBatch batch_from_wire(const std::string& json_line);

// Serves a Coordinator over a localhost TCP socket. Each connection is
// handled on its own thread; an unknown message type yields an ERROR line
// and leaves the connection open.
class CoordinatorServer {
public:
    explicit CoordinatorServer(Coordinator& coordinator);
    ~CoordinatorServer();

    CoordinatorServer(const CoordinatorServer&) = delete;
    CoordinatorServer& operator=(const CoordinatorServer&) = delete;

    void start(); // binds 127.0.0.1 on an ephemeral port
    void stop();
    int port() const { return port_; }

    // Pushes an ASSIGN line to every listed worker's open connection.
    void push_assignment(const SensingTask& task, const std::vector<std::string>& worker_ids);

private:
    struct Connection;

    void accept_loop();
    void serve_connection(std::shared_ptr<Connection> conn);
    std::string handle_line(const std::string& line, const std::shared_ptr<Connection>& conn);

    Coordinator& coordinator_;
    int listen_fd_ = -1;
    int port_ = 0;
    std::thread accept_thread_;
    std::mutex mu_;
    std::vector<std::thread> conn_threads_;
    std::vector<std::shared_ptr<Connection>> conns_;
    std::map<std::string, std::shared_ptr<Connection>> by_worker_;
    bool stopping_ = false;
};

// Client half used by networked workers and by the harness to fetch reports.
class WireClient {
public:
    WireClient() = default;
    ~WireClient();

    WireClient(const WireClient&) = delete;
    WireClient& operator=(const WireClient&) = delete;

    void connect(const std::string& host, int port);
    void close();
    bool connected() const { return fd_ >= 0; }

    void register_worker(const std::string& worker_id, const std::set<std::string>& sensors);
    SensingTask wait_assignment(); // blocks until an ASSIGN line arrives
    void send_batch(const DataBatch& batch); // waits for the matching ACK
    TaskReport fetch_report(std::uint64_t task_id);

    // Raw line exchange, used by protocol-level tests.
    void send_line(const std::string& line);
    std::string read_line();

private:
    int fd_ = -1;
    std::string rxbuf_;
};

} // namespace selsense
