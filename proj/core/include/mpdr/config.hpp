#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mpdr {

/// One `key = value` line of a config section, with its source line for
/// diagnostics.
struct ConfigEntry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

/// Sectioned key-value config. Sections keep file order and may repeat (a
/// repeated name means a list, e.g. one [autoencoder] per ensemble member).
/// Lookups throw ConfigError naming the section, key, and line.
struct ConfigSection {
    std::string name;
    std::size_t line = 0;
    std::vector<ConfigEntry> entries;

    const ConfigEntry* find(const std::string& key) const;
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::size_t get_size(const std::string& key) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Comma-separated non-negative integers; an empty value is an empty list.
    std::vector<std::size_t> get_size_list(const std::string& key) const;
    std::vector<std::size_t> get_size_list(const std::string& key,
                                           std::vector<std::size_t> fallback) const;

    /// Rejects keys outside the allowed set (typo guard).
    void allow_keys(std::initializer_list<const char*> allowed) const;
};

struct Config {
    std::vector<ConfigSection> sections;
    std::string origin;             // path or "<string>", for messages
    std::uint64_t content_hash = 0; // FNV-1a of the raw text

    bool has_section(const std::string& name) const;
    /// The single section with this name; throws ConfigError when absent or
    /// repeated.
    const ConfigSection& section(const std::string& name) const;
    /// All sections with this name, in file order (possibly empty).
    std::vector<const ConfigSection*> all(const std::string& name) const;
    /// Rejects section names outside the allowed set.
    void allow_sections(std::initializer_list<const char*> allowed) const;
};

/// Parses INI-style text: `[section]` headers, `key = value` lines, blank
/// lines, and full-line `#` or `;` comments. Keys must live inside a
/// section; duplicate keys within one section are rejected. ParseError
/// messages carry `origin:line:`.
Config parse_config(const std::string& text, const std::string& origin = "<string>");

/// Reads and parses a config file. IoError when unreadable.
Config load_config(const std::string& path);

} // namespace mpdr
