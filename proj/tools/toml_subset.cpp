#include "toml_subset.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dblend::cli {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
    throw std::runtime_error("toml parse error (line " + std::to_string(line) + "): " + what);
}

struct Cursor {
    const std::string& s;
    size_t pos = 0;
    int line;

    bool done() const { return pos >= s.size(); }
    char peek() const { return s[pos]; }
    void skip_ws() {
        while (!done() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n' || s[pos] == '\r'))
            ++pos;
    }
};

json parse_value(Cursor& c);

std::string parse_string(Cursor& c) {
    ++c.pos;  // opening quote
    std::string out;
    while (!c.done() && c.peek() != '"') {
        char ch = c.s[c.pos++];
        if (ch == '\\' && !c.done()) {
            char esc = c.s[c.pos++];
            switch (esc) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(c.line, std::string("unsupported escape \\") + esc);
            }
        } else {
            out += ch;
        }
    }
    if (c.done()) fail(c.line, "unterminated string");
    ++c.pos;  // closing quote
    return out;
}

json parse_array(Cursor& c) {
    ++c.pos;  // '['
    json arr = json::array();
    c.skip_ws();
    while (!c.done() && c.peek() != ']') {
        arr.push_back(parse_value(c));
        c.skip_ws();
        if (!c.done() && c.peek() == ',') {
            ++c.pos;
            c.skip_ws();
        }
    }
    if (c.done()) fail(c.line, "unterminated array");
    ++c.pos;  // ']'
    return arr;
}

json parse_value(Cursor& c) {
    c.skip_ws();
    if (c.done()) fail(c.line, "missing value");
    const char ch = c.peek();
    if (ch == '"') return parse_string(c);
    if (ch == '[') return parse_array(c);
    // bare token: bool or number
    size_t start = c.pos;
    while (!c.done() && c.s[c.pos] != ',' && c.s[c.pos] != ']' && c.s[c.pos] != ' ' &&
           c.s[c.pos] != '\t' && c.s[c.pos] != '\n' && c.s[c.pos] != '\r')
        ++c.pos;
    std::string tok = c.s.substr(start, c.pos - start);
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) fail(c.line, "empty value");
    const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" ||
                          tok == "-inf" || tok == "nan";
    try {
        size_t used = 0;
        if (is_float) {
            double v = std::stod(tok, &used);
            if (used != tok.size()) fail(c.line, "bad number '" + tok + "'");
            return v;
        }
        long long v = std::stoll(tok, &used);
        if (used != tok.size()) fail(c.line, "bad number '" + tok + "'");
        return v;
    } catch (const std::exception&) {
        fail(c.line, "cannot parse value '" + tok + "'");
    }
}

std::vector<std::string> split_key_path(const std::string& key, int line) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : key) {
        if (ch == '.') {
            if (cur.empty()) fail(line, "empty key segment in '" + key + "'");
            parts.push_back(cur);
            cur.clear();
        } else if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-') {
            cur += ch;
        } else if (ch == ' ' || ch == '\t') {
            continue;
        } else {
            fail(line, std::string("unsupported character '") + ch + "' in key");
        }
    }
    if (cur.empty()) fail(line, "empty key segment in '" + key + "'");
    parts.push_back(cur);
    return parts;
}

json* descend(json& root, const std::vector<std::string>& path, int line) {
    json* node = &root;
    for (const std::string& seg : path) {
        if (node->is_array()) node = &node->back();
        if (!node->is_object()) fail(line, "key path collides with a non-table value");
        node = &(*node)[seg];
        if (node->is_null()) *node = json::object();
    }
    if (node->is_array()) node = &node->back();
    return node;
}

/// Strip a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

int bracket_balance(const std::string& s) {
    int depth = 0;
    bool in_string = false;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
        if (in_string) continue;
        if (s[i] == '[') ++depth;
        if (s[i] == ']') --depth;
    }
    return depth;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

json parse_toml(const std::string& text) {
    json root = json::object();
    json* current = &root;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        // join continuation lines while inside an array literal
        int start_line = lineno;
        while (bracket_balance(line) > 0) {
            std::string more;
            if (!std::getline(in, more)) fail(start_line, "unterminated array");
            ++lineno;
            line += " " + trim(strip_comment(more));
        }

        if (line.front() == '[') {
            const bool is_array = line.size() > 1 && line[1] == '[';
            const std::string closer = is_array ? "]]" : "]";
            const size_t open = is_array ? 2 : 1;
            const size_t close = line.find(closer);
            if (close == std::string::npos || trim(line.substr(close + closer.size())) != "")
                fail(start_line, "malformed table header");
            const auto path = split_key_path(line.substr(open, close - open), start_line);
            if (is_array) {
                json* node = &root;
                for (size_t i = 0; i + 1 < path.size(); ++i) {
                    if (node->is_array()) node = &node->back();
                    node = &(*node)[path[i]];
                    if (node->is_null()) *node = json::object();
                }
                if (node->is_array()) node = &node->back();
                json& slot = (*node)[path.back()];
                if (slot.is_null()) slot = json::array();
                if (!slot.is_array()) fail(start_line, "array-of-tables collides with value");
                slot.push_back(json::object());
                current = &slot.back();
            } else {
                current = descend(root, path, start_line);
            }
            continue;
        }

        const size_t eq = [&] {
            bool in_string = false;
            for (size_t i = 0; i < line.size(); ++i) {
                if (line[i] == '"') in_string = !in_string;
                if (line[i] == '=' && !in_string) return i;
            }
            return std::string::npos;
        }();
        if (eq == std::string::npos) fail(start_line, "expected 'key = value'");
        const auto path = split_key_path(trim(line.substr(0, eq)), start_line);
        Cursor c{line, eq + 1, start_line};
        json value = parse_value(c);
        c.skip_ws();
        if (!c.done()) fail(start_line, "trailing characters after value");

        json* node = current;
        for (size_t i = 0; i + 1 < path.size(); ++i) {
            node = &(*node)[path[i]];
            if (node->is_null()) *node = json::object();
        }
        (*node)[path.back()] = std::move(value);
    }
    return root;
}

json parse_toml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_toml(buf.str());
}

}  // namespace dblend::cli
