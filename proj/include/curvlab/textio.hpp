#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace curvlab {

// Shortest decimal representation that round-trips the exact double.
// Locale-independent; used for every CSV and config number we emit.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

std::vector<std::string> split(const std::string& line, char sep);

// CSV emitter: '.' decimal, ',' separator, LF endings.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    CsvWriter& cell(const std::string& v);
    CsvWriter& cell(double v) { return cell(format_double(v)); }
    CsvWriter& cell(int v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::int64_t v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::size_t v) { return cell(std::to_string(v)); }
    CsvWriter& cell(bool v) { return cell(std::string(v ? "1" : "0")); }
    void end_row();

    const std::string& str() const { return out_; }
    void save(const std::filesystem::path& path) const;

private:
    std::string out_;
    std::size_t columns_ = 0;
    std::size_t in_row_ = 0;
};

// Flat "key = value" configuration. '#' starts a comment, blank lines ignored.
class FlatConfig {
public:
    FlatConfig() = default;
    static FlatConfig parse(const std::string& text);
    static FlatConfig load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int_or(const std::string& key, int fallback) const;
    std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    // Throws ConfigError naming the first key outside `allowed`.
    void require_known_keys(const std::vector<std::string>& allowed) const;

    // Canonical serialized form (sorted keys) for the resolved-config copy.
    std::string serialize() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace curvlab
