#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace revhelp {

inline constexpr std::uint64_t fnv_offset_basis = 14695981039346656037ull;

inline std::uint64_t fnv1a_64(std::uint64_t h, const void* bytes, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a_64(std::uint64_t h, const std::string& s) {
    return fnv1a_64(h, s.data(), s.size());
}

// Shortest decimal text that parses back to exactly the same double.
std::string double_to_text(double v);

}  // namespace revhelp
