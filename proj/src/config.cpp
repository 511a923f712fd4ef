#include "cmalab/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cmalab/errors.hpp"

namespace cmalab {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string location(const std::string& source, int line) {
    const std::string where = source.empty() ? std::string("command line") : source;
    return line > 0 ? where + ":" + std::to_string(line) : where + ":override";
}

bool parse_real(std::string_view text, double& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

std::string format_real(double x) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
    if (ec != std::errc()) return "nan";
    return std::string(buf.data(), ptr);
}

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
    ConfigFile cfg;
    cfg.source_ = source;
    std::string section;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string text = trim(raw);
        if (text.empty() || text[0] == '#' || text[0] == ';') continue;
        if (text.front() == '[') {
            if (text.back() != ']' || text.size() < 3) {
                throw ConfigurationError(location(source, line) + ": malformed section header '" + text + "'");
            }
            section = trim(std::string_view(text).substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigurationError(location(source, line) + ": expected 'key = value', got '" + text + "'");
        }
        const std::string key = trim(std::string_view(text).substr(0, eq));
        const std::string value = trim(std::string_view(text).substr(eq + 1));
        if (key.empty()) throw ConfigurationError(location(source, line) + ": empty key");
        if (section.empty()) {
            throw ConfigurationError(location(source, line) + ": key '" + key + "' appears before any [section]");
        }
        if (const Entry* prev = cfg.find(section, key)) {
            throw ConfigurationError(location(source, line) + ": [" + section + "] " + key +
                                     ": duplicate key (first set on line " + std::to_string(prev->line) + ")");
        }
        cfg.entries_.push_back({section, key, value, line});
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError(path + ": cannot open config file");
    return parse(in, path);
}

ConfigFile ConfigFile::from_output_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError(path + ": cannot open output file");
    std::ostringstream body;
    std::string raw;
    while (std::getline(in, raw)) {
        if (raw.rfind("# ", 0) != 0 && raw != "#") break;
        body << (raw.size() > 2 ? raw.substr(2) : std::string()) << '\n';
    }
    std::istringstream text(body.str());
    return parse(text, path);
}

void ConfigFile::set(const std::string& section, const std::string& key, const std::string& value) {
    for (Entry& e : entries_) {
        if (e.section == section && e.key == key) {
            e.value = value;
            e.line = 0;
            return;
        }
    }
    entries_.push_back({section, key, value, 0});
}

const ConfigFile::Entry* ConfigFile::find(std::string_view section, std::string_view key) const noexcept {
    for (const Entry& e : entries_) {
        if (e.section == section && e.key == key) return &e;
    }
    return nullptr;
}

void ConfigFile::fail(const Entry& e, const std::string& message) const {
    throw ConfigurationError(location(source_, e.line) + ": [" + e.section + "] " + e.key + ": " + message);
}

std::optional<double> ConfigFile::get_double(std::string_view section, std::string_view key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    double v = 0.0;
    if (!parse_real(e->value, v)) fail(*e, "expected a finite number, got '" + e->value + "'");
    return v;
}

std::optional<long long> ConfigFile::get_int(std::string_view section, std::string_view key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    long long v = 0;
    const char* first = e->value.data();
    const char* last = first + e->value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail(*e, "expected an integer, got '" + e->value + "'");
    return v;
}

std::optional<std::string> ConfigFile::get_string(std::string_view section, std::string_view key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return e->value;
}

std::optional<std::vector<double>> ConfigFile::get_list(std::string_view section, std::string_view key) const {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    std::vector<double> out;
    std::string item;
    std::istringstream in(e->value);
    while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        double v = 0.0;
        if (!parse_real(t, v)) fail(*e, "expected a comma-separated list of numbers, bad item '" + t + "'");
        out.push_back(v);
    }
    if (out.empty()) fail(*e, "empty list");
    return out;
}

void ConfigFile::reject_unknown(const std::vector<std::string>& allowed) const {
    for (const Entry& e : entries_) {
        const std::string name = e.section + "." + e.key;
        if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) fail(e, "unknown key");
    }
}

}  // namespace cmalab
