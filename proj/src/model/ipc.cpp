#include <cerrno>
#include <cstring>

#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "attncause/model/trace.hpp"

namespace attncause {

using nlohmann::json;

IpcClient::IpcClient(const std::string& command) {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
        throw TransportError(std::string("socketpair failed: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        throw TransportError(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::close(fds[0]);
        ::dup2(fds[1], STDIN_FILENO);
        ::dup2(fds[1], STDOUT_FILENO);
        ::close(fds[1]);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(fds[1]);
    fd_ = fds[0];
    pid_ = pid;
}

IpcClient::~IpcClient() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
    }
    if (pid_ > 0) {
        int status = 0;
        ::waitpid(pid_, &status, 0);
    }
}

std::string IpcClient::read_line() {
    while (true) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        char chunk[4096];
        const ssize_t got = ::recv(fd_, chunk, sizeof chunk, 0);
        if (got < 0 && errno == EINTR) continue;
        if (got <= 0) {
            buffer_.clear();
            throw TransportError("model endpoint closed the connection");
        }
        buffer_.append(chunk, static_cast<std::size_t>(got));
    }
}

json IpcClient::call(const json& request) {
    const std::string line = request.dump() + '\n';
    std::size_t sent = 0;
    while (sent < line.size()) {
        const ssize_t n = ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) throw TransportError(std::string("failed to send request: ") + std::strerror(errno));
        sent += static_cast<std::size_t>(n);
    }
    const std::string reply = read_line();
    json response;
    try {
        response = json::parse(reply);
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed response line: ") + e.what());
    }
    if (response.is_object() && response.contains("error")) {
        throw Error("model endpoint error: " + response.at("error").dump());
    }
    return response;
}

Ranking IpcClient::recommend(std::span<const ItemId> session, std::size_t k) {
    const json response = call({{"op", "recommend"}, {"items", std::vector<ItemId>(session.begin(), session.end())}, {"k", k}});
    try {
        return ranking_from_json(response.at("topk"));
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad recommend response: ") + e.what());
    }
}

Attention IpcClient::attention(std::span<const ItemId> tokens) {
    const json response = call({{"op", "attention"}, {"items", std::vector<ItemId>(tokens.begin(), tokens.end())}});
    Attention a;
    try {
        a.values = matrix_from_json(response.at("attention"));
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad attention response: ") + e.what());
    }
    if (a.tokens() != static_cast<Eigen::Index>(tokens.size())) {
        throw FormatError("attention response has " + std::to_string(a.tokens()) + " rows for " +
                          std::to_string(tokens.size()) + " tokens");
    }
    validate(a);
    return a;
}

}  // namespace attncause
