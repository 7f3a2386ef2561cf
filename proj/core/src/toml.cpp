#include "lito/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "lito/errors.hpp"
#include "lito/io_util.hpp"

namespace lito {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw config_error("toml: line " + std::to_string(line_no) + ": " + what);
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Removes a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
        else if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

json parse_scalar(const std::string& raw, std::size_t line_no);

json parse_string(const std::string& raw, std::size_t line_no) {
    if (raw.size() < 2 || raw.back() != '"') fail(line_no, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        char c = raw[i];
        if (c == '\\') {
            if (i + 2 >= raw.size()) fail(line_no, "dangling escape");
            char e = raw[++i];
            switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(line_no, std::string("unsupported escape \\") + e);
            }
        } else if (c == '"') {
            fail(line_no, "unexpected quote inside string");
        } else {
            out += c;
        }
    }
    return out;
}

json parse_array(const std::string& raw, std::size_t line_no) {
    if (raw.back() != ']') fail(line_no, "unterminated array");
    json arr = json::array();
    std::string body = raw.substr(1, raw.size() - 2);
    std::string cur;
    bool quoted = false;
    auto flush = [&]() {
        std::string v = strip(cur);
        cur.clear();
        if (!v.empty()) arr.push_back(parse_scalar(v, line_no));
    };
    for (char c : body) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) flush();
        else cur += c;
    }
    flush();
    return arr;
}

json parse_scalar(const std::string& raw, std::size_t line_no) {
    if (raw.empty()) fail(line_no, "empty value");
    if (raw.front() == '"') return parse_string(raw, line_no);
    if (raw.front() == '[') return parse_array(raw, line_no);
    if (raw == "true") return true;
    if (raw == "false") return false;
    // Number: integer when it parses without '.', 'e', or 'inf/nan' markers.
    const bool looks_int = raw.find_first_not_of("+-0123456789_") == std::string::npos;
    std::string digits;
    for (char c : raw)
        if (c != '_') digits += c;
    char* end = nullptr;
    if (looks_int) {
        long long v = std::strtoll(digits.c_str(), &end, 10);
        if (end && *end == '\0') return v;
    }
    double d = std::strtod(digits.c_str(), &end);
    if (end && *end == '\0') return d;
    fail(line_no, "cannot parse value '" + raw + "'");
}

}  // namespace

nlohmann::ordered_json parse_toml(const std::string& text) {
    json root = json::object();
    json* table = &root;
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string s = strip(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line_no, "unterminated table header");
            std::string name = strip(s.substr(1, s.size() - 2));
            if (name.empty()) fail(line_no, "empty table name");
            table = &root;
            std::istringstream parts(name);
            std::string part;
            while (std::getline(parts, part, '.')) {
                part = strip(part);
                if (part.empty()) fail(line_no, "empty table name component");
                table = &(*table)[part];
                if (!table->is_object() && !table->is_null())
                    fail(line_no, "table '" + name + "' conflicts with a value");
                if (table->is_null()) *table = json::object();
            }
            continue;
        }
        std::size_t eq = std::string::npos;
        bool quoted = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') quoted = !quoted;
            if (s[i] == '=' && !quoted) {
                eq = i;
                break;
            }
        }
        if (eq == std::string::npos) fail(line_no, "expected key = value");
        std::string key = strip(s.substr(0, eq));
        std::string value = strip(s.substr(eq + 1));
        if (key.empty()) fail(line_no, "empty key");
        if (key.front() == '"') key = parse_string(key, line_no).get<std::string>();
        if (table->contains(key)) fail(line_no, "duplicate key '" + key + "'");
        (*table)[key] = parse_scalar(value, line_no);
    }
    return root;
}

nlohmann::ordered_json load_toml_file(const std::string& path) {
    try {
        return parse_toml(read_text_file(path));
    } catch (const data_error& e) {
        throw config_error("config file " + path + ": " + e.what());
    }
}

}  // namespace lito
