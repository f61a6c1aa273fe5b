#include <cnlasp/plugin.h>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <map>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace cnlasp::plugin {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

void closeFd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
}

}  // namespace

PluginProcess::PluginProcess(const std::string& command, Millis handshakeTimeout) {
    // A dead child must surface as a failed write, not a signal.
    std::signal(SIGPIPE, SIG_IGN);

    int toChild[2];
    int fromChild[2];
    if (::pipe2(toChild, O_CLOEXEC) != 0) throw TranslatorUnavailable(std::string("pipe: ") + std::strerror(errno));
    if (::pipe2(fromChild, O_CLOEXEC) != 0) {
        ::close(toChild[0]);
        ::close(toChild[1]);
        throw TranslatorUnavailable(std::string("pipe: ") + std::strerror(errno));
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, toChild[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, fromChild[1], STDOUT_FILENO);

    const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
    pid_t       pid = -1;
    int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char**>(argv), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(toChild[0]);
    ::close(fromChild[1]);
    in_ = toChild[1];
    out_ = fromChild[0];
    if (rc != 0) {
        closeFd(in_);
        closeFd(out_);
        throw TranslatorUnavailable("cannot start '" + command + "': " + std::strerror(rc));
    }
    pid_ = pid;

    auto line = readLine(Clock::now() + handshakeTimeout);
    std::string why;
    if (!line) why = eof_ ? "exited before the handshake" : "no handshake within the timeout";
    else {
        try {
            handshake_ = json::parse(*line);
            if (!handshake_.is_object() || handshake_.value("protocol", -1) != kProtocolVersion)
                why = "unsupported handshake " + *line;
        }
        catch (const json::exception&) {
            why = "handshake is not JSON: " + *line;
        }
    }
    if (!why.empty()) {
        shutdown();
        throw TranslatorUnavailable("plugin '" + command + "' " + why);
    }
}

PluginProcess::~PluginProcess() { shutdown(); }

void PluginProcess::shutdown() {
    closeFd(in_);
    if (pid_ > 0) {
        // Give the child a moment to exit on EOF, then insist.
        int status = 0;
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                break;
            }
            ::usleep(10'000);
        }
        if (pid_ > 0) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, &status, 0);
            pid_ = -1;
        }
    }
    closeFd(out_);
}

bool PluginProcess::send(const json& message) {
    if (in_ < 0) return false;
    std::string line = message.dump() + "\n";
    std::size_t done = 0;
    while (done < line.size()) {
        auto n = ::write(in_, line.data() + done, line.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            closeFd(in_);
            return false;
        }
        done += static_cast<std::size_t>(n);
    }
    return true;
}

std::optional<std::string> PluginProcess::readLine(Clock::time_point deadline) {
    for (;;) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            auto line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        if (eof_) return std::nullopt;
        auto left = std::chrono::duration_cast<Millis>(deadline - Clock::now()).count();
        if (left <= 0) return std::nullopt;
        pollfd p{out_, POLLIN, 0};
        int    r = ::poll(&p, 1, static_cast<int>(left));
        if (r < 0) {
            if (errno == EINTR) continue;
            eof_ = true;
            return std::nullopt;
        }
        if (r == 0) return std::nullopt;
        char buf[4096];
        auto n = ::read(out_, buf, sizeof buf);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) {
            eof_ = true;
            continue;
        }
        buffer_.append(buf, static_cast<std::size_t>(n));
    }
}

std::optional<json> PluginProcess::receive(Clock::time_point deadline) {
    while (auto line = readLine(deadline)) {
        try {
            auto j = json::parse(*line);
            if (j.is_object()) return j;
        }
        catch (const json::exception&) {
        }
    }
    return std::nullopt;
}

std::vector<Reply> exchange(PluginProcess& proc, const std::vector<json>& requests, Millis timeout,
                            std::size_t window, std::int64_t& nextId, ExchangeStats* stats) {
    ExchangeStats local;
    auto&         st = stats ? *stats : local;
    std::vector<Reply> out(requests.size());
    if (window == 0) window = 1;

    struct Pending {
        std::size_t       index;
        Clock::time_point deadline;
    };
    std::map<std::int64_t, Pending> pending;
    std::size_t                     next = 0;

    auto fail = [&](std::size_t i, const std::string& why) { out[i].error = why; };

    while (next < requests.size() || !pending.empty()) {
        while (next < requests.size() && pending.size() < window) {
            auto msg = requests[next];
            auto id = nextId++;
            msg["id"] = id;
            if (!proc.send(msg)) {
                fail(next++, "plugin exited");
                continue;
            }
            ++st.sent;
            pending[id] = {next++, Clock::now() + timeout};
        }
        if (pending.empty()) continue;

        auto earliest = pending.begin()->second.deadline;
        for (const auto& [id, p] : pending) earliest = std::min(earliest, p.deadline);
        auto msg = proc.receive(earliest);
        if (msg) {
            auto idIt = msg->find("id");
            if (idIt == msg->end() || !idIt->is_number_integer() || !pending.contains(idIt->get<std::int64_t>())) {
                ++st.stale;
                continue;
            }
            auto  id = idIt->get<std::int64_t>();
            auto& reply = out[pending[id].index];
            if (msg->contains("error") && (*msg)["error"].is_string()) reply.error = (*msg)["error"].get<std::string>();
            else if (msg->contains("cnl") && (*msg)["cnl"].is_string()) reply.text = (*msg)["cnl"].get<std::string>();
            else if (msg->contains("text") && (*msg)["text"].is_string()) reply.text = (*msg)["text"].get<std::string>();
            else reply.error = "malformed response";
            ++st.answered;
            pending.erase(id);
            continue;
        }
        if (proc.exited()) {
            for (const auto& [id, p] : pending) fail(p.index, "plugin exited");
            pending.clear();
            continue;
        }
        auto now = Clock::now();
        for (auto it = pending.begin(); it != pending.end();) {
            if (it->second.deadline <= now) {
                fail(it->second.index, "timeout");
                ++st.timeouts;
                it = pending.erase(it);
            }
            else {
                ++it;
            }
        }
    }
    return out;
}

ExternalProcessProvider::ExternalProcessProvider(const std::string& command, dataset::ParaphraseConfig config,
                                                 Millis timeout)
    : proc_(command, timeout), config_(std::move(config)), timeout_(timeout) {}

std::string ExternalProcessProvider::paraphrase(const dataset::DatasetRecord& parent, int variant) {
    json req{{"nl", parent.nl}, {"task", "paraphrase"}, {"variant", variant}, {"config", dataset::toJson(config_)}};
    auto replies = exchange(proc_, {req}, timeout_, 1, next_);
    if (!replies[0].text) throw std::runtime_error(replies[0].error.value_or("no reply"));
    return *replies[0].text;
}

}  // namespace cnlasp::plugin
