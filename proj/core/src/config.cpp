#include "phswing/config.hpp"
#include "phswing/csv.hpp"
#include "phswing/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

namespace phswing {

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source)
{
    KeyValueConfig config;
    config.source_ = source;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        auto text = csv::trim(line);
        if (text.empty() || text.front() == '#')
            continue;
        auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(number) + ": expected 'key = value'");
        }
        auto key = csv::trim(std::string_view(text).substr(0, eq));
        auto value = csv::trim(std::string_view(text).substr(eq + 1));
        if (key.empty())
            throw ConfigError(source + ":" + std::to_string(number) + ": empty key");
        if (config.entries_.count(key)) {
            throw ConfigError(source + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
        }
        config.entries_[key] = Entry{value, number};
    }
    return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config file not found: " + path.string(), ErrorCode::ConfigNotFound);
    }
    auto config = parse(in, path.string());
    config.base_dir_ = path.parent_path();
    return config;
}

bool KeyValueConfig::contains(const std::string& key) const
{
    return entries_.count(key) != 0;
}

std::optional<std::string> KeyValueConfig::take(const std::string& key)
{
    auto it = entries_.find(key);
    if (it == entries_.end())
        return std::nullopt;
    consumed_.insert(key);
    return it->second.value;
}

std::optional<double> KeyValueConfig::take_double(const std::string& key)
{
    auto text = take(key);
    if (!text)
        return std::nullopt;
    double value = 0.0;
    auto result = std::from_chars(text->data(), text->data() + text->size(), value);
    if (text->empty() || result.ec != std::errc() || result.ptr != text->data() + text->size()
        || !std::isfinite(value)) {
        fail(key, "expected a finite number, got '" + *text + "'");
    }
    return value;
}

std::optional<long long> KeyValueConfig::take_int(const std::string& key)
{
    auto text = take(key);
    if (!text)
        return std::nullopt;
    long long value = 0;
    auto result = std::from_chars(text->data(), text->data() + text->size(), value);
    if (text->empty() || result.ec != std::errc() || result.ptr != text->data() + text->size()) {
        fail(key, "expected an integer, got '" + *text + "'");
    }
    return value;
}

std::optional<bool> KeyValueConfig::take_bool(const std::string& key)
{
    auto text = take(key);
    if (!text)
        return std::nullopt;
    if (*text == "1" || *text == "true" || *text == "yes" || *text == "on")
        return true;
    if (*text == "0" || *text == "false" || *text == "no" || *text == "off")
        return false;
    fail(key, "expected a boolean, got '" + *text + "'");
}

void KeyValueConfig::set(const std::string& key, const std::string& value)
{
    entries_[key] = Entry{value, 0};
    consumed_.erase(key);
}

void KeyValueConfig::ensure_consumed() const
{
    for (const auto& [key, entry] : entries_) {
        if (!consumed_.count(key))
            fail(key, "unknown key '" + key + "'");
    }
}

void KeyValueConfig::fail(const std::string& key, const std::string& what) const
{
    auto it = entries_.find(key);
    std::string where = source_;
    if (it != entries_.end() && it->second.line)
        where += ":" + std::to_string(it->second.line);
    throw ConfigError(where + ": " + what);
}

}  // namespace phswing
