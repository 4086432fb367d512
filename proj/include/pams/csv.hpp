#pragma once

#include <concepts>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace pams::csv {

/// RFC 4180 quoting: fields with commas, quotes, or newlines get wrapped,
/// embedded quotes doubled.
inline std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Shortest round-trip decimal form, identical bytes for identical doubles.
inline std::string number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <std::integral T>
std::string number(T v) {
    return std::to_string(v);
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << quote(fields[i]);
    }
    os << "\r\n";
}

} // namespace pams::csv
