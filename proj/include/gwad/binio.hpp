#ifndef GWAD_BINIO_HPP
#define GWAD_BINIO_HPP

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace gwad {

struct BadMagic : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TruncatedFile : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Little-endian primitives shared by the GWS1/SCG1/VAE1/OPT1 formats.
namespace binio {

inline void put_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void get_bytes(std::istream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n)
        throw TruncatedFile("unexpected end of file");
}

inline void write_u8(std::ostream& os, std::uint8_t v) { put_bytes(os, &v, 1); }

inline void write_u16(std::ostream& os, std::uint16_t v) {
    std::uint8_t b[2] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8)};
    put_bytes(os, b, 2);
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    put_bytes(os, b, 4);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    put_bytes(os, b, 8);
}

inline void write_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(os, bits);
}

inline std::uint8_t read_u8(std::istream& is) {
    std::uint8_t v;
    get_bytes(is, &v, 1);
    return v;
}

inline std::uint16_t read_u16(std::istream& is) {
    std::uint8_t b[2];
    get_bytes(is, b, 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t read_u32(std::istream& is) {
    std::uint8_t b[4];
    get_bytes(is, b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

inline std::uint64_t read_u64(std::istream& is) {
    std::uint8_t b[8];
    get_bytes(is, b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

inline float read_f32(std::istream& is) {
    std::uint32_t bits = read_u32(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

inline void write_magic(std::ostream& os, const char magic[4]) {
    put_bytes(os, magic, 4);
}

inline void expect_magic(std::istream& is, const char magic[4], const std::string& what) {
    char b[4];
    is.read(b, 4);
    if (is.gcount() != 4 || std::memcmp(b, magic, 4) != 0)
        throw BadMagic("bad magic for " + what);
}

}  // namespace binio
}  // namespace gwad

#endif  // GWAD_BINIO_HPP
