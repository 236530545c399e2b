#include "forcerecon/util/keyvalue.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace forcerecon {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

std::vector<KeyValue> parse_key_values(const std::string& text, const std::string& source_name) {
    std::vector<KeyValue> out;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        const std::string where = source_name + ":" + std::to_string(line);
        if (s.front() == '[') {
            if (s.back() != ']') throw ParseError(where + ": unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) throw ParseError(where + ": empty section name");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(where + ": expected key = value");
        KeyValue kv{section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
        if (kv.key.empty()) throw ParseError(where + ": empty key");
        out.push_back(std::move(kv));
    }
    return out;
}

double parse_real(const std::string& s, const std::string& what) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) throw ParseError(what + ": not a real number: '" + s + "'");
    return v;
}

long long parse_integer(const std::string& s, const std::string& what) {
    const std::string t = trim(s);
    long long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) throw ParseError(what + ": not an integer: '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s, const std::string& what) {
    const std::string t = trim(s);
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw ParseError(what + ": not a boolean: '" + s + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace forcerecon
