#pragma once

#include "forge/config.hpp"
#include "forge/fold.hpp"

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

namespace fixtures {

inline std::filesystem::path dir() { return FORGE_FIXTURE_DIR; }

inline std::filesystem::path path(const std::string& name) { return dir() / name; }

inline std::string text(const std::string& name) { return forge::read_text_file(path(name)); }

inline forge::FoldFile fold(const std::string& stem) { return forge::parse_fold(text(stem + ".fold")); }

/// Stems of every bundled .fold file, sorted.
inline std::vector<std::string> fold_names() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(dir()))
        if (e.path().extension() == ".fold") out.push_back(e.path().stem().string());
    std::sort(out.begin(), out.end());
    return out;
}

/// Designs that come with a script reproducing them from a blank sheet.
/// Ordered by crease count.
inline const std::vector<std::string> scripted = {"book", "diagonal", "roll", "accordion", "kite",
                                                  "quarter", "waterbomb", "fish", "pleat", "sawtooth"};

} // namespace fixtures
