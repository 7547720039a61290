#pragma once

#include <csignal>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

#include "corpus.hpp"
#include "tagger.hpp"

namespace ra_ner::tagger {

/// Newline-delimited byte stream to a tagger process or socket.
class LineChannel {
  public:
    LineChannel(int read_fd, int write_fd, pid_t child = -1) : m_read(read_fd), m_write(write_fd), m_child(child) {}
    LineChannel(LineChannel const&) = delete;
    LineChannel& operator=(LineChannel const&) = delete;

    ~LineChannel()
    {
        if (m_write >= 0 && m_write != m_read) {
            ::close(m_write);
        }
        if (m_read >= 0) {
            ::close(m_read);
        }
        if (m_child > 0) {
            int status = 0;
            for (int i = 0; i < 50; ++i) {
                if (::waitpid(m_child, &status, WNOHANG) != 0) {
                    return;
                }
                ::usleep(10000);
            }
            ::kill(m_child, SIGKILL);
            ::waitpid(m_child, &status, 0);
        }
    }

    /// Spawns `/bin/sh -c command` with its stdin/stdout attached.
    static std::unique_ptr<LineChannel> spawn(std::string const& command)
    {
        std::signal(SIGPIPE, SIG_IGN);
        int to_child[2];
        int from_child[2];
        if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
            throw tagger_error("pipe() failed: " + std::string(std::strerror(errno)), "");
        }
        pid_t pid = ::fork();
        if (pid < 0) {
            throw tagger_error("fork() failed: " + std::string(std::strerror(errno)), "");
        }
        if (pid == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        return std::make_unique<LineChannel>(from_child[0], to_child[1], pid);
    }

    static std::unique_ptr<LineChannel> connect_tcp(std::string const& host, std::string const& port)
    {
        std::signal(SIGPIPE, SIG_IGN);
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
            throw tagger_error("cannot resolve " + host + ":" + port + ": " + ::gai_strerror(rc), "");
        }
        int fd = -1;
        for (auto* ai = res; ai; ai = ai->ai_next) {
            fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd < 0) {
                continue;
            }
            if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
                break;
            }
            ::close(fd);
            fd = -1;
        }
        ::freeaddrinfo(res);
        if (fd < 0) {
            throw tagger_error("cannot connect to " + host + ":" + port, "");
        }
        return std::make_unique<LineChannel>(fd, fd);
    }

    void write_line(std::string_view line)
    {
        std::string buf(line);
        buf += '\n';
        std::size_t off = 0;
        while (off < buf.size()) {
            auto n = ::write(m_write, buf.data() + off, buf.size() - off);
            if (n < 0) {
                if (errno == EINTR) {
                    continue;
                }
                throw tagger_error("write to tagger failed: " + std::string(std::strerror(errno)), "");
            }
            off += static_cast<std::size_t>(n);
        }
    }

    /// Next line without its terminator; nullopt on timeout or end of stream.
    std::optional<std::string> read_line(int timeout_ms)
    {
        for (;;) {
            if (auto nl = m_buf.find('\n'); nl != std::string::npos) {
                auto line = m_buf.substr(0, nl);
                m_buf.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') {
                    line.pop_back();
                }
                return line;
            }
            if (m_eof) {
                return std::nullopt;
            }
            pollfd p{m_read, POLLIN, 0};
            int rc = ::poll(&p, 1, timeout_ms);
            if (rc < 0 && errno == EINTR) {
                continue;
            }
            if (rc <= 0) {
                return std::nullopt;
            }
            char chunk[65536];
            auto n = ::read(m_read, chunk, sizeof chunk);
            if (n < 0 && errno == EINTR) {
                continue;
            }
            if (n <= 0) {
                m_eof = true;
                continue;
            }
            m_buf.append(chunk, static_cast<std::size_t>(n));
        }
    }

  private:
    int m_read;
    int m_write;
    pid_t m_child;
    std::string m_buf;
    bool m_eof = false;
};

/// `stdio:<shell command>` or `tcp:<host>:<port>`.
inline std::unique_ptr<LineChannel> open_endpoint(std::string const& endpoint)
{
    if (endpoint.rfind("stdio:", 0) == 0) {
        return LineChannel::spawn(endpoint.substr(6));
    }
    if (endpoint.rfind("tcp:", 0) == 0) {
        auto rest = endpoint.substr(4);
        auto colon = rest.rfind(':');
        if (colon == std::string::npos) {
            throw error("tcp endpoint needs host:port");
        }
        return LineChannel::connect_tcp(rest.substr(0, colon), rest.substr(colon + 1));
    }
    throw error("unknown endpoint '" + endpoint + "' (expected stdio:<cmd> or tcp:<host>:<port>)");
}

inline nlohmann::json make_request(std::string const& id, std::vector<std::string> const& tokens, std::size_t base_len)
{
    return {{"id", id}, {"tokens", tokens}, {"base_len", base_len}};
}

/// Sends `{"op":"ping"}` and expects `{"op":"pong"}`.
inline bool ping(LineChannel& ch, int timeout_ms)
{
    ch.write_line(R"({"op":"ping"})");
    auto line = ch.read_line(timeout_ms);
    if (!line) {
        return false;
    }
    try {
        auto j = nlohmann::json::parse(*line);
        return j.is_object() && j.value("op", "") == "pong";
    } catch (nlohmann::json::exception const&) {
        return false;
    }
}

struct RemoteOptions {
    int timeout_ms = 30000;
    std::size_t max_in_flight = 16;
};

/// Client for the tagger wire protocol. Responses may arrive in any order and
/// are matched to requests by id.
class RemoteTagger final : public Tagger {
  public:
    RemoteTagger(std::unique_ptr<LineChannel> channel, RemoteOptions opts = {})
        : m_channel(std::move(channel)), m_opts(opts)
    {
        if (m_opts.max_in_flight == 0) {
            m_opts.max_in_flight = 1;
        }
        if (!ping(*m_channel, m_opts.timeout_ms)) {
            throw tagger_error("remote tagger did not answer ping", "");
        }
    }

    explicit RemoteTagger(std::string const& endpoint, RemoteOptions opts = {})
        : RemoteTagger(open_endpoint(endpoint), opts)
    {}

    std::vector<LabelSeq> tag(std::span<augment::AugmentedExample const> batch) override
    {
        std::map<std::string, std::size_t> index_of;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (!index_of.emplace(batch[i].base.id, i).second) {
                throw tagger_error("duplicate example id in batch", batch[i].base.id);
            }
        }
        std::vector<std::optional<LabelSeq>> out(batch.size());
        std::set<std::size_t> pending;
        std::size_t next = 0;
        std::size_t done = 0;
        while (done < batch.size()) {
            while (next < batch.size() && pending.size() < m_opts.max_in_flight) {
                auto const& aug = batch[next];
                m_channel->write_line(make_request(aug.base.id, aug.full_tokens, aug.base_length()).dump());
                pending.insert(next++);
            }
            auto oldest = batch[*pending.begin()].base.id;
            auto line = m_channel->read_line(m_opts.timeout_ms);
            if (!line) {
                throw tagger_error("timed out or stream closed waiting for response", oldest);
            }
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(*line);
            } catch (nlohmann::json::exception const&) {
                throw tagger_error("protocol violation: response is not JSON", oldest);
            }
            if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
                throw tagger_error("protocol violation: response without string id", oldest);
            }
            auto id = j["id"].get<std::string>();
            auto it = index_of.find(id);
            if (it == index_of.end() || !pending.count(it->second)) {
                throw tagger_error("protocol violation: unexpected response id", id);
            }
            if (j.contains("error")) {
                throw tagger_error("remote error: " + j["error"].dump(), id);
            }
            if (!j.contains("labels") || !j["labels"].is_array()) {
                throw tagger_error("protocol violation: response without labels", id);
            }
            auto const& aug = batch[it->second];
            if (j["labels"].size() != aug.full_tokens.size()) {
                throw tagger_error("length mismatch: " + std::to_string(j["labels"].size()) + " labels for "
                                       + std::to_string(aug.full_tokens.size()) + " tokens",
                                   id);
            }
            LabelSeq labels;
            for (auto const& l : j["labels"]) {
                auto parsed = l.is_string() ? Label::parse(l.get<std::string>()) : std::nullopt;
                if (!parsed) {
                    throw tagger_error("unknown label " + l.dump(), id);
                }
                labels.push_back(*parsed);
            }
            out[it->second] = corpus::repair_bio(std::move(labels));
            pending.erase(it->second);
            ++done;
        }
        std::vector<LabelSeq> result;
        result.reserve(out.size());
        for (auto& o : out) {
            result.push_back(std::move(*o));
        }
        return result;
    }

    std::string name() const override { return "remote"; }

  private:
    std::unique_ptr<LineChannel> m_channel;
    RemoteOptions m_opts;
};

struct ConformanceCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Malformed request lines (none contain a newline).
inline std::vector<std::string> malformed_requests(std::size_t n, std::uint64_t seed)
{
    std::vector<std::string> templates = {
        R"({"id": "m", "tokens": [)",
        R"(not json at all)",
        R"({"id": 7, "tokens": ["a"], "base_len": 1})",
        R"({"id": "m", "tokens": "abc", "base_len": 1})",
        R"({"id": "m", "tokens": ["a", "b"]})",
        R"({"id": "m", "tokens": ["a"], "base_len": 5})",
        R"({"tokens": ["a"], "base_len": 1})",
        R"([1, 2, 3])",
        R"({"id": "m", "tokens": ["a", 3], "base_len": 1})",
        R"({"op": "dance"})",
    };
    std::mt19937_64 rng(seed);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        auto line = templates[i % templates.size()];
        if (i >= templates.size()) {
            // truncate a well-formed request at a random point
            auto full = make_request("m" + std::to_string(i), {"क", "ख", "ग"}, 2).dump();
            line = full.substr(0, 1 + rng() % (full.size() - 2));
        }
        out.push_back(std::move(line));
    }
    return out;
}

/// Ping/pong, length agreement on random requests, and one error response
/// per malformed line with the endpoint still answering afterwards.
inline std::vector<ConformanceCheck> run_conformance(LineChannel& ch, std::size_t num_requests = 200,
                                                     std::size_t num_malformed = 50, std::uint64_t seed = 0,
                                                     int timeout_ms = 10000)
{
    std::vector<ConformanceCheck> checks;
    checks.push_back({"ping/pong", ping(ch, timeout_ms), ""});
    if (!checks.back().passed) {
        checks.back().detail = "no pong";
        return checks;
    }

    std::mt19937_64 rng(seed);
    std::vector<std::string> alphabet = {"विकी", "बर्मी", "साहित्य", "<EOS>", "[SEP]", "दिल्ली", "x", "B-X", "</s>"};
    std::size_t ok = 0;
    std::string first_failure;
    for (std::size_t i = 0; i < num_requests; ++i) {
        auto len = 1 + rng() % 40;
        std::vector<std::string> toks;
        for (std::size_t k = 0; k < len; ++k) {
            toks.push_back(alphabet[rng() % alphabet.size()]);
        }
        auto base = 1 + rng() % len;
        auto id = "r" + std::to_string(i);
        ch.write_line(make_request(id, toks, base).dump());
        auto line = ch.read_line(timeout_ms);
        bool good = false;
        if (line) {
            try {
                auto j = nlohmann::json::parse(*line);
                good = j.value("id", "") == id && j.contains("labels") && j["labels"].is_array()
                       && j["labels"].size() == len;
                if (good) {
                    for (auto const& l : j["labels"]) {
                        good = good && l.is_string() && Label::parse(l.get<std::string>()).has_value();
                    }
                }
            } catch (nlohmann::json::exception const&) {
            }
        }
        if (good) {
            ++ok;
        } else if (first_failure.empty()) {
            first_failure = id + ": " + line.value_or("<no response>");
        }
    }
    checks.push_back({"length agreement", ok == num_requests,
                      std::to_string(ok) + "/" + std::to_string(num_requests)
                          + (first_failure.empty() ? "" : " first failure " + first_failure)});

    std::size_t errors = 0;
    for (auto const& bad : malformed_requests(num_malformed, seed)) {
        ch.write_line(bad);
        auto line = ch.read_line(timeout_ms);
        if (!line) {
            continue;
        }
        try {
            auto j = nlohmann::json::parse(*line);
            if (j.is_object() && j.contains("error")) {
                ++errors;
            }
        } catch (nlohmann::json::exception const&) {
        }
    }
    checks.push_back({"error responses", errors == num_malformed,
                      std::to_string(errors) + "/" + std::to_string(num_malformed)});
    checks.push_back({"alive after malformed input", ping(ch, timeout_ms), ""});
    return checks;
}

}  // namespace ra_ner::tagger
