#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mta {

/**
 * Flat key=value configuration with dotted key names, e.g.
 *
 *     # comment
 *     seed = 42
 *     shocks.family = gumbel
 *     sweep.S = 100, 1000
 *
 * '#' starts a comment anywhere on a line; blank lines are skipped; keys
 * must be unique. Entries keep file order, so canonical_text() is a stable
 * serialization used to hash the configuration into output headers.
 */
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    long get_int(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<long> get_int_list(const std::string& key) const;

    std::string canonical_text() const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

private:
    const std::string* find(const std::string& key) const;

    std::vector<std::pair<std::string, std::string>> entries_;
};

} // namespace mta
