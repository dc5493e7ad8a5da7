#include "forge/forge.hpp"
#include "forge/service.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace forge;

namespace {

std::string read_file(const fs::path& p) { return read_text_file(p); }

void write_bytes(const fs::path& p, std::span<const std::uint8_t> bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + p.string());
}

void write_text(const fs::path& p, const std::string& text) {
    write_bytes(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

FoldFile load_fold(const fs::path& p) { return parse_fold(read_file(p)); }

nlohmann::json verdict_json(const FoldabilityVerdict& v) {
    nlohmann::json violations = nlohmann::json::array();
    for (const auto& x : v.violations) {
        nlohmann::json j{{"rule", x.rule}};
        switch (x.subject) {
        case Violation::Subject::Vertex: j["vertex"] = x.first; break;
        case Violation::Subject::Face: j["face"] = x.first; break;
        case Violation::Subject::FacePair: j["faces"] = {x.first, x.second}; break;
        case Violation::Subject::Pattern: break;
        }
        violations.push_back(std::move(j));
    }
    return {{"status", to_string(v.status)}, {"violations", violations}, {"search_nodes", v.nodes}};
}

fs::path default_script_for(const fs::path& target) {
    fs::path p = target;
    p.replace_extension(".script.json");
    return p;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Origami folding environment"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file");

    std::string fold_path, result_path, target_path, script_path, out_path, view = "front", agent = "scripted", addr;
    std::string targets_dir, record_path;
    std::size_t max_steps = 0, count = 1000, size = 0;
    std::uint64_t seed = 1;
    bool svg = false;

    auto* validate = app.add_subcommand("validate", "Check that a FOLD file folds flat");
    validate->add_option("fold", fold_path)->required()->check(CLI::ExistingFile);

    auto* render = app.add_subcommand("render", "Render a crease pattern or folded view");
    render->add_option("fold", fold_path)->required()->check(CLI::ExistingFile);
    render->add_option("--view", view)->check(CLI::IsMember({"cp", "front", "back"}));
    render->add_option("-o,--output", out_path, "output file (default <fold>.<view>.png)");
    render->add_option("--size", size, "image width and height");
    render->add_flag("--svg", svg, "write SVG instead of PNG");

    auto* fold = app.add_subcommand("fold", "Apply an action script to a FOLD file");
    fold->add_option("fold", fold_path)->required()->check(CLI::ExistingFile);
    fold->add_option("--script", script_path)->required()->check(CLI::ExistingFile);
    fold->add_option("-o,--output", out_path, "write the final FOLD here instead of stdout");

    auto* score = app.add_subcommand("score", "Score a folded result against a target");
    score->add_option("result", result_path)->required()->check(CLI::ExistingFile);
    score->add_option("target", target_path)->required()->check(CLI::ExistingFile);

    auto* episode = app.add_subcommand("episode", "Run one episode against a target");
    episode->add_option("--target", target_path)->required()->check(CLI::ExistingFile);
    episode->add_option("--agent", agent)->check(CLI::IsMember({"scripted", "random"}));
    episode->add_option("--max-steps", max_steps);
    episode->add_option("--script", script_path, "script or episode record for the scripted agent (default <target>.script.json)");
    episode->add_option("--seed", seed);
    episode->add_option("--record", record_path, "write the episode record here");

    auto* serve = app.add_subcommand("serve", "Serve episodes over HTTP");
    serve->add_option("--addr", addr, "host:port");
    serve->add_option("--targets", targets_dir, "directory of target .fold files");

    auto* mcq = app.add_subcommand("mcq", "Build a one-step multiple-choice bundle");
    mcq->add_option("--scripts", targets_dir, "directory of *.script.json design scripts")->required();
    mcq->add_option("--count", count);
    mcq->add_option("--seed", seed);
    mcq->add_option("-o,--output", out_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = config_path.empty() ? Config{} : load_config(config_path);
        if (max_steps != 0) cfg.max_steps = max_steps;
        if (size != 0) cfg.image_size = size;
        ImageOptions images = cfg.session().images;

        if (*validate) {
            const auto cp = CreasePattern::from_fold(load_fold(fold_path));
            const auto v = is_foldable(cp, cfg.budget());
            auto j = verdict_json(v);
            const auto meta = describe(cp.to_fold(), "", cfg.complexity);
            j["vertices"] = meta.vertex_count;
            j["creases"] = meta.crease_count;
            j["faces"] = cp.faces().size();
            j["complexity"] = to_string(meta.complexity);
            std::cout << j.dump(2) << "\n";
            return v.valid() ? 0 : 1;
        }

        if (*render) {
            const auto cp = CreasePattern::from_fold(load_fold(fold_path));
            VectorDocument doc;
            if (view == "cp") {
                doc = render_crease_pattern(cp, images.style);
            } else {
                const auto v = is_foldable(cp, cfg.budget());
                if (!v.valid()) {
                    std::cerr << "not foldable: " << to_string(v.status) << "\n";
                    return 1;
                }
                doc = render_folded(cp, *v.witness, view == "front" ? Side::Front : Side::Back, images.style);
            }
            if (out_path.empty()) {
                fs::path p = fold_path;
                p.replace_extension("." + view + (svg ? ".svg" : ".png"));
                out_path = p.string();
            }
            if (svg) write_text(out_path, to_svg(doc, images.width, images.height, images.style.margin));
            else write_bytes(out_path, encode_png(rasterize(doc, images.width, images.height, images.style.margin)));
            std::cout << out_path << "\n";
            return 0;
        }

        if (*fold) {
            CreasePattern cp = CreasePattern::from_fold(load_fold(fold_path));
            const auto messages = script_messages(read_file(script_path));
            for (std::size_t k = 0; k < messages.size(); ++k) {
                const auto action = parse_action(messages[k]);
                auto r = apply_action(cp, action, cfg.budget());
                std::cerr << "step " << k + 1 << ": " << r.status << (r.reason.empty() ? "" : " (" + r.reason + ")")
                          << "\n";
                if (!r.accepted) return 1;
                cp = std::move(r.pattern);
            }
            const std::string text = serialize_fold(cp.to_fold());
            if (out_path.empty()) std::cout << text;
            else write_text(out_path, text);
            return 0;
        }

        if (*score) {
            const auto result = load_fold(result_path), target = load_fold(target_path);
            nlohmann::json j{{"gs", geometric_similarity(result, target, images)}, {"ss", nullptr}};
            if (auto scorer = SocketScorer::from_environment(cfg.effective_scorer_address())) {
                const auto a = folded_image(CreasePattern::from_fold(result), Side::Front, images);
                const auto b = folded_image(CreasePattern::from_fold(target), Side::Front, images);
                if (auto ss = semantic_similarity(a, b, *scorer)) j["ss"] = *ss;
            }
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (*episode) {
            const FoldFile target = load_fold(target_path);
            std::unique_ptr<AgentClient> client;
            if (agent == "scripted") {
                if (script_path.empty()) script_path = default_script_for(target_path).string();
                // a script array, or an episode record to replay
                const std::string text = read_file(script_path);
                const auto parsed = nlohmann::json::parse(text);
                client = std::make_unique<ScriptedAgent>(parsed.is_object() ? recorded_messages(parsed) : script_messages(text));
            } else {
                client = std::make_unique<RandomAgent>(seed);
            }
            std::optional<SocketScorer> scorer = SocketScorer::from_environment(cfg.effective_scorer_address());
            const auto record = run_episode("ep-cli", fs::path(target_path).stem().string(), target, *client,
                                            cfg.session(), scorer ? &*scorer : nullptr);
            const auto j = to_json(record);
            if (!record_path.empty()) write_text(record_path, j.dump(2) + "\n");
            std::cout << j.at("score").dump(2) << "\n";
            return 0;
        }

        if (*serve) {
            if (!addr.empty()) cfg.address = addr;
            if (!targets_dir.empty()) cfg.targets_dir = targets_dir;
            const auto colon = cfg.address.rfind(':');
            if (colon == std::string::npos) throw std::runtime_error("address must be host:port");
            std::shared_ptr<EmbeddingScorer> scorer;
            if (auto s = SocketScorer::from_environment(cfg.effective_scorer_address()))
                scorer = std::make_shared<SocketScorer>(std::move(*s));
            EnvService service(cfg, load_targets(cfg.targets_dir), scorer);
            const int port = service.bind(cfg.address.substr(0, colon), std::stoi(cfg.address.substr(colon + 1)));
            if (port < 0) throw std::runtime_error("cannot bind " + cfg.address);
            std::cerr << "listening on " << cfg.address.substr(0, colon) << ":" << port << "\n";
            return service.listen() ? 0 : 1;
        }

        if (*mcq) {
            std::vector<FoldSequence> sequences;
            std::vector<fs::path> scripts;
            for (const auto& e : fs::directory_iterator(targets_dir)) {
                const std::string name = e.path().filename().string();
                if (name.size() > 12 && name.ends_with(".script.json")) scripts.push_back(e.path());
            }
            std::sort(scripts.begin(), scripts.end());
            for (const auto& p : scripts) {
                const std::string id = p.filename().string().substr(0, p.filename().string().size() - 12);
                const auto actions = parse_script(read_file(p));
                sequences.push_back(build_sequence(id, actions, CreasePattern::blank(), images));
            }
            const auto instances = generate_instances(sequences, count, seed);
            write_bundle(out_path, instances, sequences, seed);
            std::cout << instances.size() << " instances from " << sequences.size() << " designs in " << out_path << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
