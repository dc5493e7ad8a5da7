#pragma once

#include "forge/config.hpp"
#include "forge/env.hpp"
#include "forge/fold.hpp"
#include "forge/raster.hpp"
#include "forge/scorer.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace forge {

/// Every *.fold file in a directory, keyed by file stem.
inline std::map<std::string, FoldFile> load_targets(const std::filesystem::path& dir) {
    std::map<std::string, FoldFile> out;
    if (!std::filesystem::is_directory(dir)) return out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".fold") continue;
        out.emplace(entry.path().stem().string(), parse_fold(read_text_file(entry.path())));
    }
    return out;
}

/// HTTP front end for episodes. Bodies are JSON; images are base64 PNG.
///
///   POST   /sessions                {"target": id}  -> {"episode_id": ...}
///   GET    /sessions/{id}/observation
///   POST   /sessions/{id}/actions   raw agent text  -> verdict
///   GET    /sessions/{id}/score     closes the episode and scores it
///   GET    /sessions/{id}/record
///   DELETE /sessions/{id}
class EnvService {
public:
    EnvService(Config cfg, std::map<std::string, FoldFile> targets, std::shared_ptr<EmbeddingScorer> scorer = nullptr)
        : cfg_(std::move(cfg)), targets_(std::move(targets)), scorer_(std::move(scorer)) {
        routes();
    }

    /// Binds to host:port (port 0 picks a free one); returns the bound port or -1.
    int bind(const std::string& host, int port) {
        if (port == 0) return server_.bind_to_any_port(host);
        return server_.bind_to_port(host, port) ? port : -1;
    }

    bool listen() { return server_.listen_after_bind(); }
    void stop() { server_.stop(); }
    void wait_until_ready() const { server_.wait_until_ready(); }

private:
    struct Slot {
        std::mutex mutex;
        std::unique_ptr<Session> session;
    };

    static void reply(httplib::Response& res, int status, const nlohmann::json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    std::shared_ptr<Slot> find(const std::string& id) {
        std::lock_guard lock(sessions_mutex_);
        const auto it = sessions_.find(id);
        return it == sessions_.end() ? nullptr : it->second;
    }

    template <typename F>
    void with_session(const httplib::Request& req, httplib::Response& res, F&& fn) {
        const auto slot = find(req.matches[1].str());
        if (!slot) return reply(res, 404, {{"error", "UnknownEpisode"}});
        std::lock_guard lock(slot->mutex);
        try {
            fn(*slot->session);
        } catch (const SessionError& e) {
            reply(res, 409, {{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
        }
    }

    void routes() {
        server_.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            std::string target;
            try {
                target = nlohmann::json::parse(req.body).at("target").get<std::string>();
            } catch (const nlohmann::json::exception&) {
                return reply(res, 400, {{"error", "BadRequest"}, {"message", "expected {\"target\": id}"}});
            }
            const auto it = targets_.find(target);
            if (it == targets_.end()) return reply(res, 404, {{"error", "UnknownTarget"}});
            char id[32];
            std::snprintf(id, sizeof id, "ep-%06llu", static_cast<unsigned long long>(++next_id_));
            auto slot = std::make_shared<Slot>();
            try {
                slot->session = std::make_unique<Session>(id, target, it->second, cfg_.session());
            } catch (const SessionError& e) {
                return reply(res, 422, {{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
            }
            {
                std::lock_guard lock(sessions_mutex_);
                sessions_.emplace(id, std::move(slot));
            }
            reply(res, 201, {{"episode_id", id}, {"target", target}, {"max_steps", cfg_.max_steps}});
        });

        server_.Get(R"(/sessions/([^/]+)/observation)", [this](const httplib::Request& req, httplib::Response& res) {
            with_session(req, res, [&](Session& s) {
                const Observation o = s.observe();
                reply(res, 200,
                      {{"target_img", base64_encode(encode_png(o.target_img))},
                       {"current_img", base64_encode(encode_png(o.current_img))},
                       {"cp_img", base64_encode(encode_png(o.cp_img))},
                       {"feedback", o.foldability_feedback},
                       {"prompt_template_id", o.prompt_template_id},
                       {"steps_attempted", o.steps_attempted},
                       {"max_steps", o.max_steps},
                       {"closed", s.closed()}});
            });
        });

        server_.Post(R"(/sessions/([^/]+)/actions)", [this](const httplib::Request& req, httplib::Response& res) {
            with_session(req, res, [&](Session& s) {
                const StepVerdict v = s.submit(req.body);
                reply(res, 200,
                      {{"accepted", v.accepted},
                       {"status", v.status},
                       {"reason", v.reason},
                       {"steps_attempted", s.record().attempts.size()}});
            });
        });

        server_.Get(R"(/sessions/([^/]+)/score)", [this](const httplib::Request& req, httplib::Response& res) {
            with_session(req, res, [&](Session& s) { reply(res, 200, to_json(s.finish(scorer_.get()))); });
        });

        server_.Get(R"(/sessions/([^/]+)/record)", [this](const httplib::Request& req, httplib::Response& res) {
            with_session(req, res, [&](Session& s) { reply(res, 200, to_json(s.record())); });
        });

        server_.Delete(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
            std::lock_guard lock(sessions_mutex_);
            if (sessions_.erase(req.matches[1].str()) == 0) return reply(res, 404, {{"error", "UnknownEpisode"}});
            res.status = 204;
        });

        server_.Get("/targets", [this](const httplib::Request&, httplib::Response& res) {
            nlohmann::json ids = nlohmann::json::array();
            for (const auto& [id, fold] : targets_) ids.push_back(id);
            reply(res, 200, {{"targets", ids}});
        });
    }

    Config cfg_;
    std::map<std::string, FoldFile> targets_;
    std::shared_ptr<EmbeddingScorer> scorer_;
    httplib::Server server_;
    std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::atomic<unsigned long long> next_id_{0};
};

} // namespace forge
