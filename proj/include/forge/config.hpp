#pragma once

#include "forge/env.hpp"
#include "forge/error.hpp"
#include "forge/fold.hpp"
#include "forge/scorer.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

namespace forge {

enum class ConfigErrc { Io, Syntax, Invalid };
using ConfigError = CodedError<ConfigErrc>;

struct Config {
    std::string address = "127.0.0.1:8080";
    std::size_t max_steps = 25;
    std::size_t max_nodes = 200000;
    double max_seconds = 5.0;
    std::size_t image_size = 512;
    std::string targets_dir = "targets";
    std::optional<std::string> scorer_address;
    std::string prompt_template_id = "full-step";
    ComplexityThresholds complexity{};

    [[nodiscard]] SearchBudget budget() const {
        return {max_nodes, std::chrono::milliseconds(static_cast<long>(max_seconds * 1000.0))};
    }

    [[nodiscard]] SessionConfig session() const {
        SessionConfig s;
        s.max_steps = max_steps;
        s.images.width = image_size;
        s.images.height = image_size;
        s.images.budget = budget();
        s.prompt_template_id = prompt_template_id;
        return s;
    }

    /// FORGE_SCORER_ADDR wins over the file.
    [[nodiscard]] std::optional<std::string> effective_scorer_address() const {
        if (const char* env = std::getenv(scorer_env_var); env != nullptr && *env != '\0') return std::string(env);
        return scorer_address;
    }
};

inline Config parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(ConfigErrc::Syntax, e.what());
    }
    if (!j.is_object()) throw ConfigError(ConfigErrc::Invalid, "config must be a JSON object");
    Config c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "address") c.address = v.get<std::string>();
            else if (key == "max_steps") c.max_steps = v.get<std::size_t>();
            else if (key == "max_nodes") c.max_nodes = v.get<std::size_t>();
            else if (key == "max_seconds") c.max_seconds = v.get<double>();
            else if (key == "image_size") c.image_size = v.get<std::size_t>();
            else if (key == "targets_dir") c.targets_dir = v.get<std::string>();
            else if (key == "scorer_address") {
                if (!v.is_null()) c.scorer_address = v.get<std::string>();
            } else if (key == "prompt_template_id") c.prompt_template_id = v.get<std::string>();
            else if (key == "easy_max_creases") c.complexity.easy_max_creases = v.get<std::size_t>();
            else if (key == "medium_max_creases") c.complexity.medium_max_creases = v.get<std::size_t>();
            else throw ConfigError(ConfigErrc::Invalid, "unknown config key \"" + key + "\"");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(ConfigErrc::Invalid, e.what());
    }
    if (c.max_steps == 0) throw ConfigError(ConfigErrc::Invalid, "max_steps must be positive");
    if (c.image_size < 64) throw ConfigError(ConfigErrc::Invalid, "image_size must be at least 64");
    if (!(c.max_seconds > 0.0)) throw ConfigError(ConfigErrc::Invalid, "max_seconds must be positive");
    return c;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(ConfigErrc::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Relative targets_dir entries resolve against the config file's directory.
inline Config load_config(const std::filesystem::path& path) {
    Config c = parse_config(read_text_file(path));
    const std::filesystem::path dir(c.targets_dir);
    if (dir.is_relative()) c.targets_dir = (path.parent_path() / dir).lexically_normal().string();
    return c;
}

} // namespace forge
