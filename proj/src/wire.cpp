#include "selsense/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

#include <json.hpp>

namespace selsense {

namespace {

using Json = nlohmann::ordered_json;

std::string dump_line(const Json& doc) { return doc.dump() + "\n"; }

Json parse_or_error(const std::string& line) {
    try {
        return Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error("BAD_MESSAGE", e.what());
    }
}

Json error_message(const std::string& code, const std::string& message) {
    Json doc;
    doc["type"] = "ERROR";
    doc["code"] = code;
    doc["message"] = message;
    return doc;
}

Json report_to_json(const TaskReport& report) {
    Json doc;
    doc["type"] = "REPORT";
    doc["task_id"] = report.task_id;
    doc["records"] = report.records;
    doc["bytes"] = report.bytes;
    doc["batches"] = report.batches;
    doc["per_worker_records"] = report.per_worker_records;
    return doc;
}

bool send_all(int fd, const std::string& data) {
    size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n <= 0) return false;
        off += static_cast<size_t>(n);
    }
    return true;
}

// Reads one '\n'-terminated line; empty return means the peer closed.
std::string recv_line(int fd, std::string& buf) {
    for (;;) {
        const auto nl = buf.find('\n');
        if (nl != std::string::npos) {
            std::string line = buf.substr(0, nl);
            buf.erase(0, nl + 1);
            return line;
        }
        char chunk[4096];
        const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
        if (n <= 0) return {};
        buf.append(chunk, static_cast<size_t>(n));
    }
}

} // namespace

std::string batch_to_wire(const DataBatch& batch) {
    Json doc;
    doc["type"] = "BATCH";
    doc["task_id"] = batch.task_id;
    doc["worker_id"] = batch.worker_id;
    doc["batch_id"] = batch.batch_id;
    Json records = Json::array();
    for (const auto& br : batch.records) records.push_back(Json::parse(record_to_json(br.record)));
    doc["records"] = std::move(records);
    return dump_line(doc);
}

DataBatch batch_from_wire(const std::string& json_line) {
    const Json doc = parse_or_error(json_line);
    DataBatch batch;
    batch.task_id = doc.at("task_id").get<std::uint64_t>();
    batch.worker_id = doc.at("worker_id").get<std::string>();
    batch.batch_id = doc.at("batch_id").get<std::string>();
    for (const auto& rec : doc.at("records")) {
        BufferedRecord br;
        br.record = record_from_json(rec.dump());
        batch.records.push_back(std::move(br));
    }
    return batch;
}

struct CoordinatorServer::Connection {
    int fd = -1;
    std::mutex write_mu;
    std::string rxbuf;
    std::string worker_id;

    ~Connection() {
        if (fd >= 0) ::close(fd);
    }

    bool write_line(const std::string& line) {
        std::lock_guard lock(write_mu);
        return send_all(fd, line);
    }
};

CoordinatorServer::CoordinatorServer(Coordinator& coordinator) : coordinator_(coordinator) {}

CoordinatorServer::~CoordinatorServer() { stop(); }

void CoordinatorServer::start() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw Error("NET_ERROR", "socket() failed");
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        throw Error("NET_ERROR", "bind() failed");
    }
    if (::listen(listen_fd_, 16) != 0) throw Error("NET_ERROR", "listen() failed");

    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);

    accept_thread_ = std::thread([this] { accept_loop(); });
}

void CoordinatorServer::stop() {
    {
        std::lock_guard lock(mu_);
        if (stopping_) return;
        stopping_ = true;
    }
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    {
        std::lock_guard lock(mu_);
        for (auto& conn : conns_) {
            if (conn->fd >= 0) ::shutdown(conn->fd, SHUT_RDWR);
        }
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    for (auto& t : conn_threads_) {
        if (t.joinable()) t.join();
    }
    conn_threads_.clear();
    std::lock_guard lock(mu_);
    by_worker_.clear();
    conns_.clear(); // destructors close the sockets
}

void CoordinatorServer::accept_loop() {
    for (;;) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) return; // listener closed
        auto conn = std::make_shared<Connection>();
        conn->fd = fd;
        std::lock_guard lock(mu_);
        if (stopping_) return; // conn destructor closes fd
        conns_.push_back(conn);
        conn_threads_.emplace_back([this, conn] { serve_connection(conn); });
    }
}

void CoordinatorServer::serve_connection(std::shared_ptr<Connection> conn) {
    for (;;) {
        const std::string line = recv_line(conn->fd, conn->rxbuf);
        if (line.empty()) break;
        std::string reply;
        try {
            reply = handle_line(line, conn);
        } catch (const Error& e) {
            reply = dump_line(error_message(e.code(), e.what()));
        } catch (const std::exception& e) {
            reply = dump_line(error_message("INTERNAL", e.what()));
        }
        if (!reply.empty() && !conn->write_line(reply)) break;
    }
    ::shutdown(conn->fd, SHUT_RDWR);
}

std::string CoordinatorServer::handle_line(const std::string& line,
                                           const std::shared_ptr<Connection>& conn) {
    const Json doc = parse_or_error(line);
    const std::string type = doc.value("type", "");
    if (type == "REGISTER") {
        WorkerInfo info;
        info.worker_id = doc.at("worker_id").get<std::string>();
        for (const auto& s : doc.at("sensors")) info.sensors.insert(s.get<std::string>());
        info.available = true;
        coordinator_.register_worker(info);
        conn->worker_id = info.worker_id;
        {
            std::lock_guard lock(mu_);
            by_worker_[info.worker_id] = conn;
        }
        Json ack;
        ack["type"] = "ACK";
        ack["worker_id"] = info.worker_id;
        return dump_line(ack);
    }
    if (type == "BATCH") {
        const DataBatch batch = batch_from_wire(line);
        const BatchAck result = coordinator_.ingest_batch(batch);
        Json ack;
        ack["type"] = "ACK";
        ack["batch_id"] = result.batch_id;
        return dump_line(ack);
    }
    if (type == "REPORT") {
        const auto task_id = doc.at("task_id").get<std::uint64_t>();
        return dump_line(report_to_json(coordinator_.task_report(task_id)));
    }
    return dump_line(error_message("UNKNOWN_TYPE", "unknown message type: " + type));
}

void CoordinatorServer::push_assignment(const SensingTask& task,
                                        const std::vector<std::string>& worker_ids) {
    Json doc;
    doc["type"] = "ASSIGN";
    doc["task_id"] = task.task_id;
    doc["query_text"] = task.query_text;
    doc["t_td_sec"] = task.t_td_sec;
    doc["t_ncf_sec"] = task.t_ncf_sec;
    doc["t_sf_sec"] = task.t_sf_sec;
    doc["push_policy"] = push_policy_name(task.push_policy);
    const std::string line = dump_line(doc);

    for (const auto& id : worker_ids) {
        std::shared_ptr<Connection> conn;
        {
            std::lock_guard lock(mu_);
            const auto it = by_worker_.find(id);
            if (it != by_worker_.end()) conn = it->second;
        }
        if (!conn || conn->fd < 0 || !conn->write_line(line)) {
            throw Error("NET_ERROR", "no open connection for worker '" + id + "'");
        }
    }
}

WireClient::~WireClient() { close(); }

void WireClient::connect(const std::string& host, int port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw Error("NET_ERROR", "socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        throw Error("NET_ERROR", "bad host address: " + host);
    }
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw Error("NET_ERROR", "connect() failed");
    }
}

void WireClient::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void WireClient::send_line(const std::string& line) {
    std::string framed = line;
    if (framed.empty() || framed.back() != '\n') framed += '\n';
    if (!send_all(fd_, framed)) throw Error("NET_ERROR", "send failed");
}

std::string WireClient::read_line() {
    const std::string line = recv_line(fd_, rxbuf_);
    if (line.empty()) throw Error("NET_ERROR", "connection closed by peer");
    return line;
}

namespace {

Json expect_type(const std::string& line, const std::string& expected) {
    Json doc;
    try {
        doc = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error("BAD_MESSAGE", e.what());
    }
    const std::string type = doc.value("type", "");
    if (type == "ERROR") {
        throw Error(doc.value("code", std::string("REMOTE")), doc.value("message", line));
    }
    if (type != expected) {
        throw Error("BAD_MESSAGE", "expected " + expected + ", got: " + line);
    }
    return doc;
}

} // namespace

void WireClient::register_worker(const std::string& worker_id,
                                 const std::set<std::string>& sensors) {
    Json doc;
    doc["type"] = "REGISTER";
    doc["worker_id"] = worker_id;
    doc["sensors"] = sensors;
    send_line(doc.dump());
    expect_type(read_line(), "ACK");
}

SensingTask WireClient::wait_assignment() {
    const Json doc = expect_type(read_line(), "ASSIGN");
    SensingTask task;
    task.task_id = doc.at("task_id").get<std::uint64_t>();
    task.query_text = doc.at("query_text").get<std::string>();
    task.query = parse_query(task.query_text);
    task.t_td_sec = doc.at("t_td_sec").get<double>();
    task.t_ncf_sec = doc.at("t_ncf_sec").get<double>();
    task.t_sf_sec = doc.at("t_sf_sec").get<double>();
    task.push_policy = push_policy_from_name(doc.at("push_policy").get<std::string>());
    task.query.push_policy = task.push_policy;
    return task;
}

void WireClient::send_batch(const DataBatch& batch) {
    send_line(batch_to_wire(batch));
    const Json ack = expect_type(read_line(), "ACK");
    if (ack.value("batch_id", "") != batch.batch_id) {
        throw Error("BAD_MESSAGE", "ack for unexpected batch: " + ack.dump());
    }
}

TaskReport WireClient::fetch_report(std::uint64_t task_id) {
    Json doc;
    doc["type"] = "REPORT";
    doc["task_id"] = task_id;
    send_line(doc.dump());
    const Json reply = expect_type(read_line(), "REPORT");
    TaskReport report;
    report.task_id = reply.at("task_id").get<std::uint64_t>();
    report.records = reply.at("records").get<std::int64_t>();
    report.bytes = reply.at("bytes").get<std::int64_t>();
    report.batches = reply.at("batches").get<std::int64_t>();
    for (const auto& [id, count] : reply.at("per_worker_records").items()) {
        report.per_worker_records[id] = count.get<std::int64_t>();
    }
    return report;
}

} // namespace selsense
