#pragma once

// External translator processes.
//
// Wire protocol, one JSON object per line on the child's stdin/stdout:
//   child -> host   {"protocol": 1}                      first line, once
//   host  -> child  {"id": 7, "nl": "..."}               (+ optional fields)
//   child -> host   {"id": 7, "cnl": "..."} | {"id": 7, "error": "..."}
// Responses may arrive in any order. A response whose id is not outstanding
// is dropped. Closing stdin asks the child to exit.

#include <cnlasp/dataset.h>

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnlasp::plugin {

inline constexpr int kProtocolVersion = 1;

class TranslatorUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Millis = std::chrono::milliseconds;

/// A child started through `/bin/sh -c command` with piped stdin/stdout;
/// stderr is inherited.
class PluginProcess {
public:
    /// Spawns and waits for the handshake line. Throws TranslatorUnavailable.
    PluginProcess(const std::string& command, Millis handshakeTimeout);
    ~PluginProcess();
    PluginProcess(const PluginProcess&) = delete;
    PluginProcess& operator=(const PluginProcess&) = delete;

    const nlohmann::json& handshake() const { return handshake_; }

    /// False once the child stopped reading.
    bool send(const nlohmann::json& message);

    /// Next complete line parsed as JSON, or nothing at the deadline / on
    /// EOF. Lines that are not JSON objects are skipped.
    std::optional<nlohmann::json> receive(std::chrono::steady_clock::time_point deadline);

    bool exited() const { return eof_; }

private:
    void                       shutdown();
    std::optional<std::string> readLine(std::chrono::steady_clock::time_point deadline);

    int            pid_ = -1;
    int            in_ = -1;   // child's stdin
    int            out_ = -1;  // child's stdout
    bool           eof_ = false;
    std::string    buffer_;
    nlohmann::json handshake_;
};

struct Reply {
    std::optional<std::string> text;   // "cnl" (or "text") field
    std::optional<std::string> error;  // plugin error, "timeout", "plugin exited"
};

struct ExchangeStats {
    std::size_t sent = 0;
    std::size_t answered = 0;
    std::size_t timeouts = 0;
    std::size_t stale = 0;  // dropped responses
};

/// Sends every request (ids are assigned here, counting from `firstId`) with
/// at most `window` outstanding; returns one reply per request in order.
/// Never throws for per-request failures.
std::vector<Reply> exchange(PluginProcess& proc, const std::vector<nlohmann::json>& requests, Millis timeout,
                            std::size_t window, std::int64_t& nextId, ExchangeStats* stats = nullptr);

/// Paraphrases through a plugin. Requests carry "task": "paraphrase", the
/// variant and the engine settings; the reply's "cnl" field (or "text") is
/// the paraphrase.
class ExternalProcessProvider : public dataset::ParaphraseProvider {
public:
    ExternalProcessProvider(const std::string& command, dataset::ParaphraseConfig config, Millis timeout);
    std::string paraphrase(const dataset::DatasetRecord& parent, int variant) override;

private:
    PluginProcess             proc_;
    dataset::ParaphraseConfig config_;
    Millis                    timeout_;
    std::int64_t              next_ = 1;
};

}  // namespace cnlasp::plugin
