#include "curvlab/textio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "curvlab/errors.hpp"

namespace curvlab {

std::string format_double(double value) {
    if (!std::isfinite(value)) throw InvalidInput("format_double: non-finite value");
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path.string());
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_.push_back(',');
        out_ += header[i];
    }
    out_.push_back('\n');
}

CsvWriter& CsvWriter::cell(const std::string& v) {
    if (in_row_ >= columns_) throw InvalidInput("CsvWriter: too many cells in row");
    if (in_row_) out_.push_back(',');
    out_ += v;
    ++in_row_;
    return *this;
}

void CsvWriter::end_row() {
    if (in_row_ != columns_) throw InvalidInput("CsvWriter: row has wrong cell count");
    out_.push_back('\n');
    in_row_ = 0;
}

void CsvWriter::save(const std::filesystem::path& path) const {
    write_text_file(path, out_);
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

FlatConfig FlatConfig::parse(const std::string& text) {
    FlatConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (cfg.values_.count(key))
            throw ConfigError("config: duplicate key '" + key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

FlatConfig FlatConfig::load(const std::filesystem::path& path) {
    return parse(read_text_file(path));
}

std::string FlatConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config: missing required key '" + key + "'");
    return it->second;
}

std::string FlatConfig::get_or(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double FlatConfig::get_double(const std::string& key) const {
    const std::string v = get(key);
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' is not a number: '" + v + "'");
    }
}

double FlatConfig::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int FlatConfig::get_int(const std::string& key) const {
    const std::string v = get(key);
    try {
        std::size_t pos = 0;
        int i = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' is not an integer: '" + v + "'");
    }
}

int FlatConfig::get_int_or(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t FlatConfig::get_u64_or(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    try {
        std::size_t pos = 0;
        std::uint64_t u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' is not an unsigned integer: '" + v + "'");
    }
}

bool FlatConfig::get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<double> FlatConfig::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& part : split(get(key), ',')) {
        try {
            out.push_back(std::stod(part));
        } catch (const std::exception&) {
            throw ConfigError("config: key '" + key + "' has a non-numeric element: '" + part + "'");
        }
    }
    return out;
}

std::vector<int> FlatConfig::get_int_list(const std::string& key) const {
    std::vector<int> out;
    for (double d : get_double_list(key)) {
        int i = static_cast<int>(d);
        if (static_cast<double>(i) != d)
            throw ConfigError("config: key '" + key + "' has a non-integer element");
        out.push_back(i);
    }
    return out;
}

void FlatConfig::require_known_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [key, value] : values_) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("config: unknown key '" + key + "'");
    }
}

std::string FlatConfig::serialize() const {
    std::string out;
    for (const auto& [key, value] : values_) {
        out += key;
        out += " = ";
        out += value;
        out.push_back('\n');
    }
    return out;
}

}  // namespace curvlab
