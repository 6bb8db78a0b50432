#include "ecoforge/data.hpp"
#include "ecoforge/error.hpp"

#include <cstdlib>
#include <map>
#include <mutex>

#ifndef ECOFORGE_SHARE_DIR
#define ECOFORGE_SHARE_DIR "data"
#endif

namespace ecoforge::data {

const Json& table(std::string_view file_name)
{
    static std::mutex mutex;
    static std::map<std::string, Json, std::less<>> cache;

    std::lock_guard lock(mutex);
    if (auto it = cache.find(file_name); it != cache.end())
        return it->second;
    auto text = embedded(file_name);
    if (text.empty())
        throw Error(ErrorCode::Io, "no embedded data file named " + std::string(file_name));
    auto [it, inserted] = cache.emplace(std::string(file_name), Json::parse(text));
    return it->second;
}

std::string share_dir()
{
    if (const char* env = std::getenv("ECOFORGE_SHARE_DIR"); env && *env)
        return env;
    return ECOFORGE_SHARE_DIR;
}

} // namespace ecoforge::data
