#pragma once

#include <chrono>
#include <deque>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "blindtrade/core/json.hpp"

namespace blindtrade::harness {

/// One message read from an agent.
struct Inbound {
    enum class Kind { Message, Malformed, Timeout, Closed };
    Kind kind = Kind::Closed;
    Json message;     // Kind::Message
    std::string raw;  // Kind::Malformed: the offending line
};

/// The harness side of the JSON-lines wire protocol.
class AgentEndpoint {
public:
    virtual ~AgentEndpoint() = default;
    virtual void send(const Json& message) = 0;
    virtual Inbound receive(std::chrono::milliseconds timeout) = 0;
};

/// Agent logic that answers each harness message with zero or more messages.
class Responder {
public:
    virtual ~Responder() = default;
    virtual std::vector<Json> on_message(const Json& message) = 0;
};

/// Runs a Responder in-process; an empty outbox reads as a timeout.
class InProcessEndpoint : public AgentEndpoint {
public:
    explicit InProcessEndpoint(std::unique_ptr<Responder> agent) : agent_(std::move(agent)) {}
    void send(const Json& message) override;
    Inbound receive(std::chrono::milliseconds timeout) override;
    Responder& agent() { return *agent_; }

private:
    std::unique_ptr<Responder> agent_;
    std::deque<Json> outbox_;
};

/// Spawns `argv` and speaks the protocol over its stdin/stdout, one JSON object per line.
class SubprocessEndpoint : public AgentEndpoint {
public:
    explicit SubprocessEndpoint(const std::vector<std::string>& argv);
    ~SubprocessEndpoint() override;
    SubprocessEndpoint(const SubprocessEndpoint&) = delete;
    SubprocessEndpoint& operator=(const SubprocessEndpoint&) = delete;

    void send(const Json& message) override;
    Inbound receive(std::chrono::milliseconds timeout) override;

private:
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    bool closed_ = false;
};

/// Serves a Responder over a pair of streams until the input closes.
/// Lines that are not JSON objects are skipped. Returns the number of messages handled.
std::size_t serve_stream(Responder& agent, std::istream& in, std::ostream& out);

}  // namespace blindtrade::harness
