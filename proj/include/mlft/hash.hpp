#pragma once

/// FNV-1a 64-bit hashing for config fingerprints and parameter-continuity
/// instrumentation.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace mlft {

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t hash_string(const std::string& s) { return fnv1a64(s.data(), s.size()); }

inline std::uint64_t hash_doubles(const std::vector<double>& a) {
    return fnv1a64(a.data(), a.size() * sizeof(double));
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mlft
