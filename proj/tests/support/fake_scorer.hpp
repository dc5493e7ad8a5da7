#pragma once

// Stand-in for the embedding sidecar: speaks the framed protocol on a unix
// socket and answers with a cheap image descriptor.

#include "forge/raster.hpp"
#include "forge/render.hpp"
#include "forge/scorer.hpp"

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <atomic>
#include <cstring>
#include <filesystem>
#include <string>
#include <thread>

namespace fake {

enum class Reply { Embedding, WrongSize, BadImage, Garbage };

/// 16x16 block means of luma and of red minus blue, plus one.
inline std::vector<double> describe(const forge::RasterImage& img) {
    std::vector<double> z(forge::embedding_size, 1.0);
    std::vector<double> count(256, 0.0);
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x) {
            const std::size_t cell = (y * 16 / img.height()) * 16 + x * 16 / img.width();
            const auto c = img.at(x, y);
            z[cell] += forge::luma_milli(c) / 255000.0;
            z[256 + cell] += (static_cast<double>(c.r) - c.b) / 255.0;
            count[cell] += 1.0;
        }
    for (std::size_t i = 0; i < 256; ++i) {
        if (count[i] == 0.0) continue;
        z[i] = 1.0 + (z[i] - 1.0) / count[i];
        z[256 + i] = 1.0 + (z[256 + i] - 1.0) / count[i];
    }
    return z;
}

class Scorer {
public:
    explicit Scorer(Reply mode = Reply::Embedding) : mode_(mode) {
        static std::atomic<int> serial{0};
        path_ = (std::filesystem::temp_directory_path() /
                 ("forge-fake-" + std::to_string(::getpid()) + "-" + std::to_string(serial++) + ".sock"))
                    .string();
        std::filesystem::remove(path_);
        fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
        sockaddr_un sa{};
        sa.sun_family = AF_UNIX;
        std::memcpy(sa.sun_path, path_.c_str(), path_.size() + 1);
        if (::bind(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) != 0 || ::listen(fd_, 8) != 0)
            throw std::runtime_error("fake scorer cannot listen on " + path_);
        thread_ = std::thread([this] { serve(); });
    }

    Scorer(const Scorer&) = delete;
    Scorer& operator=(const Scorer&) = delete;

    ~Scorer() {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        thread_.join();
        std::filesystem::remove(path_);
    }

    [[nodiscard]] std::string address() const { return "unix:" + path_; }
    [[nodiscard]] int requests() const { return requests_.load(); }

private:
    void serve() {
        for (;;) {
            const int c = ::accept(fd_, nullptr, nullptr);
            if (c < 0) return;
            try {
                const auto req = forge::receive_frame(c);
                ++requests_;
                const auto png = forge::base64_decode(req.at("image").get<std::string>());
                nlohmann::json reply;
                switch (mode_) {
                case Reply::Embedding: reply = {{"embedding", describe(forge::decode_png(png))}}; break;
                case Reply::WrongSize: reply = {{"embedding", std::vector<double>(3, 1.0)}}; break;
                case Reply::BadImage: reply = {{"error", "BadImage"}}; break;
                case Reply::Garbage: reply = {{"embedding", "nope"}}; break;
                }
                forge::send_frame(c, reply);
            } catch (const std::exception&) {
            }
            ::close(c);
        }
    }

    Reply mode_;
    std::string path_;
    int fd_ = -1;
    std::atomic<int> requests_{0};
    std::thread thread_;
};

} // namespace fake
