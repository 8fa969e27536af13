#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace phswing {

// Flat "key = value" file. Blank lines and lines starting with '#' are ignored.
// Consumers take() the keys they understand; leftovers are reported as unknown.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>");
    static KeyValueConfig load(const std::filesystem::path& path);

    bool contains(const std::string& key) const;
    std::optional<std::string> take(const std::string& key);
    std::optional<double> take_double(const std::string& key);
    std::optional<long long> take_int(const std::string& key);
    std::optional<bool> take_bool(const std::string& key);

    void set(const std::string& key, const std::string& value);

    // Throws ConfigError naming the first key nobody consumed.
    void ensure_consumed() const;

    const std::filesystem::path& base_dir() const { return base_dir_; }
    const std::string& source() const { return source_; }

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };
    std::map<std::string, Entry> entries_;
    std::set<std::string> consumed_;
    std::filesystem::path base_dir_;
    std::string source_;

    [[noreturn]] void fail(const std::string& key, const std::string& what) const;
};

}  // namespace phswing
