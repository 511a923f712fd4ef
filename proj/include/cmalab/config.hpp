#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cmalab {

// Line-oriented configuration: "[section]" headers and "key = value" entries.
// Blank lines and lines starting with '#' or ';' are ignored.
class ConfigFile {
public:
    struct Entry {
        std::string section;
        std::string key;
        std::string value;
        int line = 0;  // 0 for entries set programmatically
    };

    static ConfigFile parse(std::istream& in, const std::string& source);
    static ConfigFile parse_file(const std::string& path);
    // Reads the config echoed into the leading "# " comment block of an output file.
    static ConfigFile from_output_header(const std::string& path);

    const std::string& source() const noexcept { return source_; }
    const std::vector<Entry>& entries() const noexcept { return entries_; }

    // Adds or replaces an entry ("section.key=value" overrides).
    void set(const std::string& section, const std::string& key, const std::string& value);

    const Entry* find(std::string_view section, std::string_view key) const noexcept;

    // Typed accessors. Errors carry "source:line: [section] key: ..." and throw ConfigurationError.
    std::optional<double> get_double(std::string_view section, std::string_view key) const;
    std::optional<long long> get_int(std::string_view section, std::string_view key) const;
    std::optional<std::string> get_string(std::string_view section, std::string_view key) const;
    std::optional<std::vector<double>> get_list(std::string_view section, std::string_view key) const;

    // Throws for any entry whose "section.key" is not in the allowed list.
    void reject_unknown(const std::vector<std::string>& allowed) const;

    [[noreturn]] void fail(const Entry& e, const std::string& message) const;

private:
    std::string source_;
    std::vector<Entry> entries_;
};

// Shortest round-trippable form is not required; 17 significant digits always.
std::string format_real(double x);

}  // namespace cmalab
