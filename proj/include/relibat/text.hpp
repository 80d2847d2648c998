#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace relibat {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double value)
{
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc())
    {
        throw std::runtime_error("cannot format number");
    }
    return std::string(buffer, ptr);
}

/// Strict parse of a whole field (surrounding blanks allowed).
inline double parse_double(std::string_view field)
{
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
    {
        field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
    {
        field.remove_suffix(1);
    }
    double value = 0.0;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || field.empty())
    {
        throw std::invalid_argument("not a number: \"" + std::string(field) + "\"");
    }
    return value;
}

}  // namespace relibat
