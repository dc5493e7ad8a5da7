#pragma once

#include "forge/error.hpp"

#include <nlohmann/json.hpp>

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <sys/un.h>
#include <unistd.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

enum class ScorerErrc { Unavailable, Protocol, BadImage };
using ScorerError = CodedError<ScorerErrc>;

inline constexpr std::size_t embedding_size = 512;
inline constexpr const char* scorer_env_var = "FORGE_SCORER_ADDR";

inline std::string base64_encode(std::span<const std::uint8_t> in) {
    static constexpr char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((in.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < in.size(); i += 3) {
        const std::uint32_t n = (in[i] << 16U) | (in[i + 1] << 8U) | in[i + 2];
        out += table[(n >> 18U) & 63U];
        out += table[(n >> 12U) & 63U];
        out += table[(n >> 6U) & 63U];
        out += table[n & 63U];
    }
    if (i < in.size()) {
        std::uint32_t n = in[i] << 16U;
        if (i + 1 < in.size()) n |= in[i + 1] << 8U;
        out += table[(n >> 18U) & 63U];
        out += table[(n >> 12U) & 63U];
        out += i + 1 < in.size() ? table[(n >> 6U) & 63U] : '=';
        out += '=';
    }
    return out;
}

inline std::vector<std::uint8_t> base64_decode(std::string_view in) {
    const auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : in) {
        if (c == '=') break;
        const int v = value(c);
        if (v < 0) throw ScorerError(ScorerErrc::Protocol, "invalid base64");
        acc = (acc << 6U) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFFU));
        }
    }
    return out;
}

/// Source of image embeddings for semantic similarity.
class EmbeddingScorer {
public:
    virtual ~EmbeddingScorer() = default;
    /// Embedding of a PNG image; throws ScorerError.
    virtual std::vector<double> embed(std::span<const std::uint8_t> png) = 0;
};

namespace detail {

class Fd {
public:
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() {
        if (fd_ >= 0) ::close(fd_);
    }
    [[nodiscard]] int get() const noexcept { return fd_; }

private:
    int fd_;
};

inline void write_all(int fd, const void* data, std::size_t n) {
    const auto* p = static_cast<const char*>(data);
    while (n > 0) {
        const ssize_t k = ::send(fd, p, n, MSG_NOSIGNAL);
        if (k <= 0) throw ScorerError(ScorerErrc::Unavailable, "scorer connection lost while sending");
        p += k;
        n -= static_cast<std::size_t>(k);
    }
}

inline void read_all(int fd, void* data, std::size_t n) {
    auto* p = static_cast<char*>(data);
    while (n > 0) {
        const ssize_t k = ::recv(fd, p, n, 0);
        if (k <= 0) throw ScorerError(ScorerErrc::Unavailable, "scorer connection lost while receiving");
        p += k;
        n -= static_cast<std::size_t>(k);
    }
}

} // namespace detail

/// Writes one frame: 4-byte big-endian length, then the JSON text.
inline void send_frame(int fd, const nlohmann::json& msg) {
    const std::string body = msg.dump();
    const std::uint32_t len = htonl(static_cast<std::uint32_t>(body.size()));
    detail::write_all(fd, &len, sizeof len);
    detail::write_all(fd, body.data(), body.size());
}

inline nlohmann::json receive_frame(int fd, std::size_t max_bytes = 64U << 20U) {
    std::uint32_t len = 0;
    detail::read_all(fd, &len, sizeof len);
    len = ntohl(len);
    if (len > max_bytes) throw ScorerError(ScorerErrc::Protocol, "frame too large");
    std::string body(len, '\0');
    detail::read_all(fd, body.data(), body.size());
    try {
        return nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScorerError(ScorerErrc::Protocol, e.what());
    }
}

/// Client for the embedding sidecar. The address is "unix:/path/to/socket"
/// or "host:port". One connection per request.
class SocketScorer final : public EmbeddingScorer {
public:
    explicit SocketScorer(std::string address, std::chrono::milliseconds timeout = std::chrono::seconds(30))
        : address_(std::move(address)), timeout_(timeout) {}

    /// Scorer named by FORGE_SCORER_ADDR, or `fallback` when unset.
    static std::optional<SocketScorer> from_environment(std::optional<std::string> fallback = std::nullopt) {
        if (const char* env = std::getenv(scorer_env_var); env != nullptr && *env != '\0') return SocketScorer(env);
        if (fallback && !fallback->empty()) return SocketScorer(*fallback);
        return std::nullopt;
    }

    [[nodiscard]] const std::string& address() const noexcept { return address_; }

    std::vector<double> embed(std::span<const std::uint8_t> png) override {
        detail::Fd fd(connect_socket());
        timeval tv{};
        tv.tv_sec = static_cast<time_t>(timeout_.count() / 1000);
        tv.tv_usec = static_cast<suseconds_t>((timeout_.count() % 1000) * 1000);
        ::setsockopt(fd.get(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
        ::setsockopt(fd.get(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
        send_frame(fd.get(), {{"image", base64_encode(png)}});
        const auto reply = receive_frame(fd.get());
        if (reply.contains("error")) {
            const auto msg = reply["error"].is_string() ? reply["error"].get<std::string>() : reply["error"].dump();
            throw ScorerError(msg == "BadImage" ? ScorerErrc::BadImage : ScorerErrc::Protocol, msg);
        }
        if (!reply.contains("embedding") || !reply["embedding"].is_array())
            throw ScorerError(ScorerErrc::Protocol, "reply has no embedding");
        std::vector<double> z;
        for (const auto& v : reply["embedding"]) {
            if (!v.is_number()) throw ScorerError(ScorerErrc::Protocol, "embedding entries must be numbers");
            z.push_back(v.get<double>());
        }
        if (z.size() != embedding_size)
            throw ScorerError(ScorerErrc::Protocol, "expected " + std::to_string(embedding_size) + " values");
        return z;
    }

private:
    int connect_socket() const {
        if (address_.rfind("unix:", 0) == 0) {
            const std::string path = address_.substr(5);
            sockaddr_un sa{};
            if (path.size() >= sizeof sa.sun_path) throw ScorerError(ScorerErrc::Unavailable, "socket path too long");
            sa.sun_family = AF_UNIX;
            std::memcpy(sa.sun_path, path.c_str(), path.size() + 1);
            const int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
            if (fd < 0) throw ScorerError(ScorerErrc::Unavailable, "socket() failed");
            if (::connect(fd, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0) {
                ::close(fd);
                throw ScorerError(ScorerErrc::Unavailable, "cannot connect to " + address_);
            }
            return fd;
        }
        const auto colon = address_.rfind(':');
        if (colon == std::string::npos) throw ScorerError(ScorerErrc::Unavailable, "bad scorer address " + address_);
        const std::string host = address_.substr(0, colon), port = address_.substr(colon + 1);
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr)
            throw ScorerError(ScorerErrc::Unavailable, "cannot resolve " + address_);
        int fd = -1;
        for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
            fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
            if (fd < 0) continue;
            if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
            ::close(fd);
            fd = -1;
        }
        ::freeaddrinfo(res);
        if (fd < 0) throw ScorerError(ScorerErrc::Unavailable, "cannot connect to " + address_);
        return fd;
    }

    std::string address_;
    std::chrono::milliseconds timeout_;
};

} // namespace forge
