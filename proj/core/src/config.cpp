#include "mpdr/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mpdr/error.hpp"
#include "mpdr/hash.hpp"

namespace mpdr {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string where(const ConfigSection& s, const ConfigEntry& e) {
    return "[" + s.name + "] " + e.key + " (line " + std::to_string(e.line) + ")";
}

[[noreturn]] void bad_value(const ConfigSection& s, const ConfigEntry& e, const char* expected) {
    throw ConfigError("config: " + where(s, e) + ": expected " + expected + ", got '" + e.value +
                      "'");
}

double parse_double(const ConfigSection& s, const ConfigEntry& e) {
    const char* begin = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE) bad_value(s, e, "a number");
    return v;
}

std::int64_t parse_int(const ConfigSection& s, const ConfigEntry& e) {
    const char* begin = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    long long v = std::strtoll(begin, &end, 10);
    if (end == begin || *end != '\0' || errno == ERANGE) bad_value(s, e, "an integer");
    return v;
}

std::uint64_t parse_u64(const ConfigSection& s, const ConfigEntry& e) {
    if (!e.value.empty() && e.value[0] == '-') bad_value(s, e, "a non-negative integer");
    const char* begin = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    unsigned long long v = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0' || errno == ERANGE) bad_value(s, e, "a non-negative integer");
    return v;
}

const ConfigEntry& require(const ConfigSection& s, const std::string& key) {
    const ConfigEntry* e = s.find(key);
    if (e == nullptr) {
        throw ConfigError("config: [" + s.name + "] missing key '" + key + "'");
    }
    return *e;
}

} // namespace

const ConfigEntry* ConfigSection::find(const std::string& key) const {
    for (const ConfigEntry& e : entries) {
        if (e.key == key) return &e;
    }
    return nullptr;
}

bool ConfigSection::has(const std::string& key) const { return find(key) != nullptr; }

std::string ConfigSection::get_string(const std::string& key) const {
    return require(*this, key).value;
}

std::string ConfigSection::get_string(const std::string& key, const std::string& fallback) const {
    const ConfigEntry* e = find(key);
    return e == nullptr ? fallback : e->value;
}

double ConfigSection::get_double(const std::string& key) const {
    return parse_double(*this, require(*this, key));
}

double ConfigSection::get_double(const std::string& key, double fallback) const {
    const ConfigEntry* e = find(key);
    return e == nullptr ? fallback : parse_double(*this, *e);
}

std::int64_t ConfigSection::get_int(const std::string& key) const {
    return parse_int(*this, require(*this, key));
}

std::int64_t ConfigSection::get_int(const std::string& key, std::int64_t fallback) const {
    const ConfigEntry* e = find(key);
    return e == nullptr ? fallback : parse_int(*this, *e);
}

std::size_t ConfigSection::get_size(const std::string& key) const {
    const ConfigEntry& e = require(*this, key);
    std::int64_t v = parse_int(*this, e);
    if (v < 0) bad_value(*this, e, "a non-negative integer");
    return static_cast<std::size_t>(v);
}

std::size_t ConfigSection::get_size(const std::string& key, std::size_t fallback) const {
    return has(key) ? get_size(key) : fallback;
}

std::uint64_t ConfigSection::get_u64(const std::string& key) const {
    return parse_u64(*this, require(*this, key));
}

std::uint64_t ConfigSection::get_u64(const std::string& key, std::uint64_t fallback) const {
    const ConfigEntry* e = find(key);
    return e == nullptr ? fallback : parse_u64(*this, *e);
}

bool ConfigSection::get_bool(const std::string& key) const {
    const ConfigEntry& e = require(*this, key);
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    bad_value(*this, e, "true or false");
}

bool ConfigSection::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

std::vector<std::size_t> ConfigSection::get_size_list(const std::string& key) const {
    const ConfigEntry& e = require(*this, key);
    std::vector<std::size_t> out;
    std::string item;
    std::istringstream in(e.value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) bad_value(*this, e, "comma-separated integers");
        ConfigEntry fake{e.key, item, e.line};
        std::int64_t v = parse_int(*this, fake);
        if (v < 0) bad_value(*this, e, "comma-separated non-negative integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::vector<std::size_t> ConfigSection::get_size_list(const std::string& key,
                                                      std::vector<std::size_t> fallback) const {
    if (!has(key)) return fallback;
    if (find(key)->value.empty()) return {};
    return get_size_list(key);
}

void ConfigSection::allow_keys(std::initializer_list<const char*> allowed) const {
    for (const ConfigEntry& e : entries) {
        bool ok = false;
        for (const char* k : allowed) {
            if (e.key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ConfigError("config: unknown key " + where(*this, e));
        }
    }
}

bool Config::has_section(const std::string& name) const {
    for (const ConfigSection& s : sections) {
        if (s.name == name) return true;
    }
    return false;
}

const ConfigSection& Config::section(const std::string& name) const {
    const ConfigSection* found = nullptr;
    for (const ConfigSection& s : sections) {
        if (s.name != name) continue;
        if (found != nullptr) {
            throw ConfigError("config: section [" + name + "] appears more than once");
        }
        found = &s;
    }
    if (found == nullptr) throw ConfigError("config: missing section [" + name + "]");
    return *found;
}

std::vector<const ConfigSection*> Config::all(const std::string& name) const {
    std::vector<const ConfigSection*> out;
    for (const ConfigSection& s : sections) {
        if (s.name == name) out.push_back(&s);
    }
    return out;
}

void Config::allow_sections(std::initializer_list<const char*> allowed) const {
    for (const ConfigSection& s : sections) {
        bool ok = false;
        for (const char* n : allowed) {
            if (s.name == n) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ConfigError("config: unknown section [" + s.name + "] (line " +
                              std::to_string(s.line) + ")");
        }
    }
}

Config parse_config(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin = origin;
    cfg.content_hash = fnv1a64(text.data(), text.size());

    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    ConfigSection* current = nullptr;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ParseError(origin + ":" + std::to_string(line_no) +
                                 ": unterminated section header");
            }
            std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) {
                throw ParseError(origin + ":" + std::to_string(line_no) + ": empty section name");
            }
            cfg.sections.push_back(ConfigSection{name, line_no, {}});
            current = &cfg.sections.back();
            continue;
        }

        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ParseError(origin + ":" + std::to_string(line_no) + ": empty key");
        }
        if (current == nullptr) {
            throw ParseError(origin + ":" + std::to_string(line_no) + ": key '" + key +
                             "' outside any section");
        }
        if (current->has(key)) {
            throw ParseError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                             "' in section [" + current->name + "]");
        }
        current->entries.push_back(ConfigEntry{std::move(key), std::move(value), line_no});
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("config: failed reading '" + path + "'");
    return parse_config(buf.str(), path);
}

} // namespace mpdr
