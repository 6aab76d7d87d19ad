#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

namespace betatneh::csv {

// Splits one CSV line on commas; trims a trailing '\r' so CRLF files parse.
inline std::vector<std::string> split_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

inline bool parse_int(const std::string& s, int& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

}  // namespace betatneh::csv
