#include "blindtrade/harness/endpoint.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>
#include <stdexcept>

namespace blindtrade::harness {

void InProcessEndpoint::send(const Json& message) {
    for (auto& m : agent_->on_message(message)) outbox_.push_back(std::move(m));
}

Inbound InProcessEndpoint::receive(std::chrono::milliseconds) {
    if (outbox_.empty()) return {Inbound::Kind::Timeout, {}, {}};
    Inbound in{Inbound::Kind::Message, std::move(outbox_.front()), {}};
    outbox_.pop_front();
    return in;
}

SubprocessEndpoint::SubprocessEndpoint(const std::vector<std::string>& argv) {
    if (argv.empty()) throw std::invalid_argument("agent command is empty");
    // A dead agent must surface as a closed stream, not kill the harness.
    signal(SIGPIPE, SIG_IGN);
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]);
        close(in_pipe[1]);
        throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
    }
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    pid_ = fork();
    if (pid_ < 0) throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execvp(args[0], args.data());
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
}

SubprocessEndpoint::~SubprocessEndpoint() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    if (pid_ > 0) {
        int status = 0;
        // Give the agent a moment to exit on EOF before forcing it.
        for (int i = 0; i < 50; ++i) {
            if (waitpid(pid_, &status, WNOHANG) == pid_) return;
            usleep(10000);
        }
        kill(pid_, SIGKILL);
        waitpid(pid_, &status, 0);
    }
}

void SubprocessEndpoint::send(const Json& message) {
    if (to_child_ < 0) return;
    const std::string line = message.dump() + "\n";
    std::size_t off = 0;
    while (off < line.size()) {
        const ssize_t n = write(to_child_, line.data() + off, line.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            close(to_child_);  // agent went away; receive() will report it
            to_child_ = -1;
            return;
        }
        off += static_cast<std::size_t>(n);
    }
}

Inbound SubprocessEndpoint::receive(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            try {
                Json j = Json::parse(line);
                if (j.is_object()) return {Inbound::Kind::Message, std::move(j), {}};
            } catch (const Json::parse_error&) {
            }
            return {Inbound::Kind::Malformed, {}, std::move(line)};
        }
        if (closed_) return {Inbound::Kind::Closed, {}, {}};
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return {Inbound::Kind::Timeout, {}, {}};
        pollfd p{from_child_, POLLIN, 0};
        const int r = poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
        if (r < 0 && errno == EINTR) continue;
        if (r <= 0) continue;
        char buf[4096];
        const ssize_t n = read(from_child_, buf, sizeof buf);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) {
            closed_ = true;
            if (!buffer_.empty() && buffer_.back() != '\n') buffer_ += '\n';
            continue;
        }
        buffer_.append(buf, static_cast<std::size_t>(n));
    }
}

std::size_t serve_stream(Responder& agent, std::istream& in, std::ostream& out) {
    std::size_t handled = 0;
    std::string line;
    while (std::getline(in, line)) {
        Json msg;
        try {
            msg = Json::parse(line);
        } catch (const Json::parse_error&) {
            continue;
        }
        if (!msg.is_object()) continue;
        ++handled;
        for (const auto& reply : agent.on_message(msg)) out << reply.dump() << '\n';
        out.flush();
        if (msg.value("type", "") == "episode_end") break;
    }
    return handled;
}

}  // namespace blindtrade::harness
