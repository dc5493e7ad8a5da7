#include "forge/config.hpp"
#include "forge/service.hpp"
#include "forge/taskgen.hpp"
#include "support/fake_scorer.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace forge;

namespace {

Config small_config() {
    Config c;
    c.image_size = 64;
    c.max_steps = 4;
    return c;
}

class Running {
public:
    explicit Running(Config cfg = small_config(), std::shared_ptr<EmbeddingScorer> scorer = nullptr)
        : cfg_(cfg), service_(cfg, load_targets(fixtures::dir()), std::move(scorer)) {
        port_ = service_.bind("127.0.0.1", 0);
        if (port_ <= 0) throw std::runtime_error("bind failed");
        thread_ = std::thread([this] { service_.listen(); });
        service_.wait_until_ready();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    }
    ~Running() {
        service_.stop();
        thread_.join();
    }

    httplib::Client& http() { return *client_; }
    int port() const { return port_; }
    const Config& config() const { return cfg_; }

    std::string create(const std::string& target) {
        const auto r = http().Post("/sessions", nlohmann::json{{"target", target}}.dump(), "application/json");
        if (!r || r->status != 201) throw std::runtime_error("create failed");
        return nlohmann::json::parse(r->body).at("episode_id").get<std::string>();
    }

    nlohmann::json act(const std::string& id, const std::string& text, int expect = 200) {
        const auto r = http().Post("/sessions/" + id + "/actions", text, "text/plain");
        EXPECT_TRUE(r);
        if (!r) return {};
        EXPECT_EQ(r->status, expect);
        return nlohmann::json::parse(r->body);
    }

    nlohmann::json get(const std::string& path, int expect = 200) {
        const auto r = http().Get(path);
        EXPECT_TRUE(r);
        if (!r) return {};
        EXPECT_EQ(r->status, expect);
        return nlohmann::json::parse(r->body);
    }

private:
    Config cfg_;
    EnvService service_;
    int port_ = 0;
    std::thread thread_;
    std::unique_ptr<httplib::Client> client_;
};

RasterImage image_field(const nlohmann::json& j, const char* key) {
    return decode_png(base64_decode(j.at(key).get<std::string>()));
}

} // namespace

TEST(Config, Defaults) {
    const auto c = parse_config("{}");
    EXPECT_EQ(c.max_steps, 25U);
    EXPECT_EQ(c.budget().max_nodes, 200000U);
    EXPECT_EQ(c.budget().max_time, std::chrono::milliseconds(5000));
    EXPECT_EQ(c.session().images.width, 512U);
    EXPECT_FALSE(c.scorer_address);
}

TEST(Config, Overrides) {
    const auto c = parse_config(R"({"max_steps": 10, "max_seconds": 0.5, "image_size": 128, "scorer_address": "unix:/tmp/s"})");
    EXPECT_EQ(c.session().max_steps, 10U);
    EXPECT_EQ(c.budget().max_time, std::chrono::milliseconds(500));
    EXPECT_EQ(c.session().images.height, 128U);
    EXPECT_EQ(c.scorer_address, "unix:/tmp/s");
}

TEST(Config, Errors) {
    const auto code = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return e.code();
        }
        ADD_FAILURE() << text;
        return ConfigErrc::Io;
    };
    EXPECT_EQ(code("{"), ConfigErrc::Syntax);
    EXPECT_EQ(code("[]"), ConfigErrc::Invalid);
    EXPECT_EQ(code(R"({"max_step": 3})"), ConfigErrc::Invalid);
    EXPECT_EQ(code(R"({"max_steps": "3"})"), ConfigErrc::Invalid);
    EXPECT_EQ(code(R"({"max_steps": 0})"), ConfigErrc::Invalid);
    EXPECT_EQ(code(R"({"image_size": 16})"), ConfigErrc::Invalid);
    EXPECT_EQ(code(R"({"max_seconds": 0})"), ConfigErrc::Invalid);
    try {
        load_config("/nonexistent/forge.json");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.code(), ConfigErrc::Io);
    }
}

TEST(Config, TargetsDirRelativeToFile) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("forge-config-" + std::to_string(::getpid()));
    fs::create_directories(dir);
    {
        std::ofstream(dir / "forge.json") << R"({"targets_dir": "designs"})";
    }
    EXPECT_EQ(fs::path(load_config(dir / "forge.json").targets_dir), (dir / "designs").lexically_normal());
    fs::remove_all(dir);
}

TEST(Targets, LoadsEveryFoldFile) {
    const auto t = load_targets(fixtures::dir());
    EXPECT_EQ(t.size(), fixtures::fold_names().size());
    EXPECT_EQ(t.at("kite"), fixtures::fold("kite"));
    EXPECT_TRUE(load_targets("/nonexistent").empty());
}

TEST(Service, ListsTargets) {
    Running svc;
    const auto j = svc.get("/targets");
    EXPECT_EQ(j["targets"].size(), fixtures::fold_names().size());
}

TEST(Service, MatchesInProcessSession) {
    Running svc;
    const std::string id = svc.create("kite");
    Session local("local", "kite", fixtures::fold("kite"), svc.config().session());

    const auto obs = svc.get("/sessions/" + id + "/observation");
    const auto lobs = local.observe();
    EXPECT_EQ(image_field(obs, "target_img"), lobs.target_img);
    EXPECT_EQ(image_field(obs, "current_img"), lobs.current_img);
    EXPECT_EQ(image_field(obs, "cp_img"), lobs.cp_img);
    EXPECT_EQ(obs["steps_attempted"], 0);
    EXPECT_EQ(obs["max_steps"], 4);

    auto msgs = script_messages(fixtures::text("kite.script.json"));
    msgs.insert(msgs.begin() + 1, "not json");
    for (const auto& m : msgs) {
        const auto v = svc.act(id, m);
        const auto lv = local.submit(m);
        EXPECT_EQ(v["accepted"], lv.accepted);
        EXPECT_EQ(v["status"], lv.status);
        EXPECT_EQ(v["reason"], lv.reason);
    }
    const auto after = svc.get("/sessions/" + id + "/observation");
    EXPECT_EQ(image_field(after, "current_img"), local.observe().current_img);
    EXPECT_EQ(after["feedback"], true);

    const auto score = svc.get("/sessions/" + id + "/score");
    const auto ls = local.finish();
    EXPECT_EQ(score["gs"], ls.gs);
    EXPECT_EQ(score["qe"], ls.qe);
    EXPECT_EQ(score["gs"], 1.0);
    EXPECT_TRUE(score["ss"].is_null());

    const auto rec = svc.get("/sessions/" + id + "/record");
    EXPECT_EQ(rec["final_fold"], local.record().final_fold);
    EXPECT_EQ(recorded_messages(rec), msgs);
}

TEST(Service, SessionsAreIsolated) {
    Running svc;
    const std::string a = svc.create("book");
    const std::string b = svc.create("book");
    EXPECT_NE(a, b);
    EXPECT_TRUE(svc.act(a, R"({"action": "add_crease", "p1": [5, 0], "p2": [5, 10], "assignment": "V"})")["accepted"]);
    EXPECT_EQ(svc.get("/sessions/" + a + "/observation")["steps_attempted"], 1);
    EXPECT_EQ(svc.get("/sessions/" + b + "/observation")["steps_attempted"], 0);
    EXPECT_EQ(svc.get("/sessions/" + a + "/score")["gs"], 1.0);
    EXPECT_LT(svc.get("/sessions/" + b + "/score")["gs"].get<double>(), 1.0);
}

TEST(Service, ConcurrentSessions) {
    Running svc;
    std::vector<std::thread> workers;
    std::vector<double> gs(4, 0.0);
    for (int w = 0; w < 4; ++w)
        workers.emplace_back([&, w] {
            httplib::Client c("127.0.0.1", svc.port());
            const auto r = c.Post("/sessions", R"({"target": "waterbomb"})", "application/json");
            if (!r || r->status != 201) return;
            const std::string id = nlohmann::json::parse(r->body)["episode_id"];
            for (const auto& m : script_messages(fixtures::text("waterbomb.script.json")))
                c.Post("/sessions/" + id + "/actions", m, "text/plain");
            const auto s = c.Get("/sessions/" + id + "/score");
            if (s && s->status == 200) gs[w] = nlohmann::json::parse(s->body)["gs"];
        });
    for (auto& t : workers) t.join();
    for (double g : gs) EXPECT_EQ(g, 1.0);
}

TEST(Service, BudgetExhaustedIsConflict) {
    Running svc;
    const std::string id = svc.create("book");
    for (int i = 0; i < 4; ++i) svc.act(id, "nonsense");
    const auto j = svc.act(id, "nonsense", 409);
    EXPECT_EQ(j["error"], "BudgetExhausted");
    EXPECT_EQ(svc.get("/sessions/" + id + "/record")["attempts"].size(), 4U);
}

TEST(Service, ClosedSessionIsConflict) {
    Running svc;
    const std::string id = svc.create("book");
    svc.get("/sessions/" + id + "/score");
    EXPECT_EQ(svc.act(id, "nonsense", 409)["error"], "SessionClosed");
    EXPECT_EQ(svc.get("/sessions/" + id + "/observation")["closed"], true);
}

TEST(Service, ErrorsAndDeletion) {
    Running svc;
    EXPECT_EQ(svc.get("/sessions/ep-999999/observation", 404)["error"], "UnknownEpisode");
    auto r = svc.http().Post("/sessions", R"({"target": "nope"})", "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 404);
    r = svc.http().Post("/sessions", "target=book", "text/plain");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 400);
    const std::string id = svc.create("book");
    auto d = svc.http().Delete("/sessions/" + id);
    ASSERT_TRUE(d);
    EXPECT_EQ(d->status, 204);
    d = svc.http().Delete("/sessions/" + id);
    ASSERT_TRUE(d);
    EXPECT_EQ(d->status, 404);
    svc.get("/sessions/" + id + "/observation", 404);
}

TEST(Service, ScoresWithScorer) {
    fake::Scorer scorer;
    Running svc(small_config(), std::make_shared<SocketScorer>(scorer.address()));
    const std::string id = svc.create("book");
    svc.act(id, R"({"action": "add_crease", "p1": [5, 0], "p2": [5, 10], "assignment": "V"})");
    const auto s = svc.get("/sessions/" + id + "/score");
    ASSERT_TRUE(s["ss"].is_number());
    EXPECT_NEAR(s["ss"].get<double>(), 1.0, 1e-5);
    EXPECT_EQ(scorer.requests(), 2);
}
