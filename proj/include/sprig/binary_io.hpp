#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sprig/error.hpp"

// Little-endian primitives shared by the on-disk graph, index and vector
// formats.
namespace sprig::binary {

template <typename T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_arithmetic_v<T>);
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    static_assert(sizeof(U) == sizeof(T));
    U bits;
    std::memcpy(&bits, &value, sizeof bits);
    char buf[sizeof(U)];
    for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    out.write(buf, sizeof buf);
}

template <typename T>
T read_le(std::istream& in, const char* component) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    unsigned char buf[sizeof(U)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof buf)) throw Error(component, "unexpected end of file");
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(buf[i]) << (8 * i);
    T value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
}

template <typename T>
void write_array(std::ostream& out, std::span<const T> values) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
    } else {
        for (const T& v : values) write_le(out, v);
    }
}

template <typename T>
std::vector<T> read_array(std::istream& in, std::size_t count, const char* component) {
    std::vector<T> values(count);
    if constexpr (std::endian::native == std::endian::little) {
        if (count && !in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(T))))
            throw Error(component, "unexpected end of file");
    } else {
        for (auto& v : values) v = read_le<T>(in, component);
    }
    return values;
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in, const char* component) {
    const auto len = read_le<std::uint32_t>(in, component);
    std::string s(len, '\0');
    if (len && !in.read(s.data(), len)) throw Error(component, "unexpected end of file");
    return s;
}

inline void expect_magic(std::istream& in, const char (&magic)[9], const char* component) {
    char buf[8];
    if (!in.read(buf, 8) || std::memcmp(buf, magic, 8) != 0)
        throw Error(component, std::string("bad magic, expected ") + magic);
}

}  // namespace sprig::binary
