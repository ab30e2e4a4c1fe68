#include "mta/config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mta/errors.hpp"

namespace mta {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

long to_long(const std::string& key, const std::string& value) {
    long out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size() || value.empty())
        throw validation_error("config: `" + key + "` is not an integer: " + value);
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    if (value.empty())
        throw validation_error("config: `" + key + "` is empty");
    errno = 0;
    char* end = nullptr;
    const double out = std::strtod(value.c_str(), &end);
    if (errno != 0 || end != value.c_str() + value.size() || !std::isfinite(out))
        throw validation_error("config: `" + key + "` is not a number: " + value);
    return out;
}

} // namespace

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw validation_error("config: line " + std::to_string(line_no)
                                   + ": expected key = value");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw validation_error("config: line " + std::to_string(line_no) + ": empty key");
        if (cfg.find(key))
            throw validation_error("config: line " + std::to_string(line_no)
                                   + ": duplicate key `" + key + "`");
        cfg.entries_.emplace_back(key, value);
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

const std::string* Config::find(const std::string& key) const {
    for (const auto& kv : entries_)
        if (kv.first == key) return &kv.second;
    return nullptr;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

std::string Config::get_string(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) throw validation_error("config: missing key `" + key + "`");
    return *v;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const std::string* v = find(key);
    return v ? *v : fallback;
}

long Config::get_int(const std::string& key) const { return to_long(key, get_string(key)); }

long Config::get_int(const std::string& key, long fallback) const {
    const std::string* v = find(key);
    return v ? to_long(key, *v) : fallback;
}

double Config::get_double(const std::string& key) const {
    return to_double(key, get_string(key));
}

double Config::get_double(const std::string& key, double fallback) const {
    const std::string* v = find(key);
    return v ? to_double(key, *v) : fallback;
}

bool Config::get_bool(const std::string& key) const {
    const std::string v = get_string(key);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw validation_error("config: `" + key + "` is not a boolean: " + v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    return find(key) ? get_bool(key) : fallback;
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size() || v->empty())
        throw validation_error("config: `" + key + "` is not a valid seed: " + *v);
    return out;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    const std::string raw = get_string(key);
    std::vector<double> out;
    std::istringstream split(raw);
    std::string item;
    while (std::getline(split, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw validation_error("config: `" + key + "` is an empty list");
    return out;
}

std::vector<long> Config::get_int_list(const std::string& key) const {
    const std::string raw = get_string(key);
    std::vector<long> out;
    std::istringstream split(raw);
    std::string item;
    while (std::getline(split, item, ',')) out.push_back(to_long(key, trim(item)));
    if (out.empty()) throw validation_error("config: `" + key + "` is an empty list");
    return out;
}

std::string Config::canonical_text() const {
    std::string out;
    for (const auto& kv : entries_) {
        out += kv.first;
        out += '=';
        out += kv.second;
        out += '\n';
    }
    return out;
}

} // namespace mta
