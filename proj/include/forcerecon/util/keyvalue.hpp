#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace forcerecon {

/// One `key = value` line; `section` is the latest `[name]` header ("" before any header).
struct KeyValue {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// '#' starts a comment; blank lines are skipped; anything else must be a header or key = value.
std::vector<KeyValue> parse_key_values(const std::string& text, const std::string& source_name);

std::string trim(const std::string& s);
std::vector<std::string> split_words(const std::string& s);
double parse_real(const std::string& s, const std::string& what);
long long parse_integer(const std::string& s, const std::string& what);
bool parse_bool(const std::string& s, const std::string& what);
std::string read_text_file(const std::string& path);

}  // namespace forcerecon
