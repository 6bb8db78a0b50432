#pragma once

#include "ecoforge/model.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace ecoforge::test {

inline std::string source_path(const std::string& relative)
{
    return std::string(ECOFORGE_SOURCE_DIR) + "/" + relative;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string model_path(const std::string& name)
{
    return source_path("data/models/" + name + ".json");
}

inline ConceptualModel load_model(const std::string& name)
{
    return parse_model(read_file(model_path(name)));
}

// Every bundled model file, sorted by name.
inline std::vector<std::string> bundled_models()
{
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(source_path("data/models")))
        if (entry.path().extension() == ".json")
            names.push_back(entry.path().stem().string());
    std::sort(names.begin(), names.end());
    return names;
}

} // namespace ecoforge::test
