#pragma once

// Minimal TOML reader covering the subset the suite configs use: [table] and
// [[array-of-tables]] headers (dotted paths), bare keys, basic strings,
// integers, floats, booleans, homogeneous single-line arrays, and comments.
// Errors carry 1-based line numbers.

#include <json.hpp>

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spider_linnik {

class toml_error : public std::runtime_error {
public:
    toml_error(std::size_t line, const std::string& what)
        : std::runtime_error("TOML line " + std::to_string(line) + ": " + what),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

namespace toml_detail {

struct Cursor {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t line = 1;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char take() { return text[pos++]; }

    void skip_ws() {
        while (!done() && (peek() == ' ' || peek() == '\t')) ++pos;
    }
};

inline bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

inline std::string parse_bare_key(Cursor& c) {
    std::string key;
    while (!c.done() && is_bare_key_char(c.peek())) key.push_back(c.take());
    if (key.empty()) throw toml_error(c.line, "expected a bare key");
    return key;
}

inline std::vector<std::string> parse_key_path(Cursor& c) {
    std::vector<std::string> path;
    path.push_back(parse_bare_key(c));
    c.skip_ws();
    while (!c.done() && c.peek() == '.') {
        c.take();
        c.skip_ws();
        path.push_back(parse_bare_key(c));
        c.skip_ws();
    }
    return path;
}

inline std::string parse_basic_string(Cursor& c) {
    if (c.take() != '"') throw toml_error(c.line, "expected '\"'");
    std::string out;
    while (true) {
        if (c.done()) throw toml_error(c.line, "unterminated string");
        const char ch = c.take();
        if (ch == '"') return out;
        if (ch == '\n') throw toml_error(c.line, "newline inside basic string");
        if (ch == '\\') {
            if (c.done()) throw toml_error(c.line, "dangling escape");
            const char esc = c.take();
            switch (esc) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                default:
                    throw toml_error(c.line,
                                     std::string("unsupported escape '\\") + esc + "'");
            }
        } else {
            out.push_back(ch);
        }
    }
}

inline nlohmann::ordered_json parse_number(Cursor& c) {
    const std::size_t start = c.pos;
    bool is_float = false;
    if (!c.done() && (c.peek() == '+' || c.peek() == '-')) c.take();
    while (!c.done()) {
        const char ch = c.peek();
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            c.take();
        } else if (ch == '.' || ch == 'e' || ch == 'E') {
            is_float = true;
            c.take();
            if (!c.done() && (c.peek() == '+' || c.peek() == '-') &&
                (ch == 'e' || ch == 'E'))
                c.take();
        } else {
            break;
        }
    }
    const std::string token(c.text.substr(start, c.pos - start));
    if (token.empty() || token == "+" || token == "-")
        throw toml_error(c.line, "expected a number");
    try {
        std::size_t used = 0;
        nlohmann::ordered_json out;
        if (is_float)
            out = std::stod(token, &used);
        else
            out = static_cast<std::int64_t>(std::stoll(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
        return out;
    } catch (const std::exception&) {
        throw toml_error(c.line, "malformed number '" + token + "'");
    }
}

nlohmann::ordered_json parse_value(Cursor& c);  // forward

inline nlohmann::ordered_json parse_array(Cursor& c) {
    if (c.take() != '[') throw toml_error(c.line, "expected '['");
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    c.skip_ws();
    if (!c.done() && c.peek() == ']') {
        c.take();
        return arr;
    }
    while (true) {
        c.skip_ws();
        arr.push_back(parse_value(c));
        c.skip_ws();
        if (c.done()) throw toml_error(c.line, "unterminated array");
        const char ch = c.take();
        if (ch == ']') break;
        if (ch != ',') throw toml_error(c.line, "expected ',' or ']' in array");
        c.skip_ws();
        if (!c.done() && c.peek() == ']') {  // trailing comma
            c.take();
            break;
        }
    }
    if (arr.size() > 1) {
        const auto first = arr.front().type();
        const bool first_numeric = arr.front().is_number();
        for (const auto& v : arr) {
            const bool same = v.type() == first || (first_numeric && v.is_number());
            if (!same) throw toml_error(c.line, "arrays must be homogeneous");
        }
    }
    return arr;
}

inline nlohmann::ordered_json parse_value(Cursor& c) {
    if (c.done()) throw toml_error(c.line, "expected a value");
    const char ch = c.peek();
    if (ch == '"') return nlohmann::ordered_json(parse_basic_string(c));
    if (ch == '[') return parse_array(c);
    if (std::isalpha(static_cast<unsigned char>(ch))) {
        const std::string word = parse_bare_key(c);
        if (word == "true") return nlohmann::ordered_json(true);
        if (word == "false") return nlohmann::ordered_json(false);
        throw toml_error(c.line, "unrecognized value '" + word +
                                     "' (strings must be double-quoted)");
    }
    return parse_number(c);
}

// Walks a dotted path from the document root, creating tables as needed.
// When an intermediate node is an array of tables, descends into its last
// element (standard TOML resolution).
inline nlohmann::ordered_json* resolve_path(nlohmann::ordered_json* node,
                                            const std::vector<std::string>& path,
                                            std::size_t upto, std::size_t line) {
    for (std::size_t i = 0; i < upto; ++i) {
        if (node->is_array()) {
            if (node->empty()) throw toml_error(line, "empty array of tables");
            node = &node->back();
        }
        if (!node->is_object())
            throw toml_error(line, "key '" + path[i] + "' is not a table");
        if (!node->contains(path[i])) (*node)[path[i]] = nlohmann::ordered_json::object();
        node = &(*node)[path[i]];
    }
    if (node->is_array()) {
        if (node->empty()) throw toml_error(line, "empty array of tables");
        node = &node->back();
    }
    return node;
}

}  // namespace toml_detail

inline nlohmann::ordered_json parse_toml(std::string_view text) {
    using namespace toml_detail;
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    nlohmann::ordered_json* current = &doc;

    Cursor c{text};
    while (!c.done()) {
        c.skip_ws();
        if (c.done()) break;
        const char ch = c.peek();
        if (ch == '\n') {
            c.take();
            ++c.line;
            continue;
        }
        if (ch == '\r') {
            c.take();
            continue;
        }
        if (ch == '#') {
            while (!c.done() && c.peek() != '\n') c.take();
            continue;
        }
        if (ch == '[') {
            c.take();
            const bool array_of_tables = !c.done() && c.peek() == '[';
            if (array_of_tables) c.take();
            c.skip_ws();
            const std::vector<std::string> path = parse_key_path(c);
            c.skip_ws();
            if (c.done() || c.take() != ']')
                throw toml_error(c.line, "expected ']' closing table header");
            if (array_of_tables && (c.done() || c.take() != ']'))
                throw toml_error(c.line, "expected ']]' closing array-of-tables header");
            nlohmann::ordered_json* parent =
                resolve_path(&doc, path, path.size() - 1, c.line);
            const std::string& leaf = path.back();
            if (array_of_tables) {
                if (!parent->contains(leaf)) (*parent)[leaf] = nlohmann::ordered_json::array();
                if (!(*parent)[leaf].is_array())
                    throw toml_error(c.line, "'" + leaf + "' is not an array of tables");
                (*parent)[leaf].push_back(nlohmann::ordered_json::object());
                current = &(*parent)[leaf].back();
            } else {
                if (parent->contains(leaf)) {
                    if (!(*parent)[leaf].is_object())
                        throw toml_error(c.line, "table '" + leaf + "' conflicts with a value");
                } else {
                    (*parent)[leaf] = nlohmann::ordered_json::object();
                }
                current = &(*parent)[leaf];
            }
        } else if (is_bare_key_char(ch)) {
            const std::size_t key_line = c.line;
            const std::vector<std::string> path = parse_key_path(c);
            c.skip_ws();
            if (c.done() || c.take() != '=')
                throw toml_error(key_line, "expected '=' after key '" + path.back() + "'");
            c.skip_ws();
            nlohmann::ordered_json value = parse_value(c);
            nlohmann::ordered_json* table =
                resolve_path(current, path, path.size() - 1, key_line);
            if (table->contains(path.back()))
                throw toml_error(key_line, "duplicate key '" + path.back() + "'");
            (*table)[path.back()] = std::move(value);
        } else {
            throw toml_error(c.line, std::string("unexpected character '") + ch + "'");
        }
        // Only whitespace and a comment may follow on the line.
        c.skip_ws();
        if (!c.done() && c.peek() == '#')
            while (!c.done() && c.peek() != '\n') c.take();
        if (!c.done() && c.peek() == '\r') c.take();
        if (!c.done()) {
            if (c.peek() != '\n')
                throw toml_error(c.line, "unexpected trailing content on line");
            c.take();
            ++c.line;
        }
    }
    return doc;
}

}  // namespace spider_linnik
