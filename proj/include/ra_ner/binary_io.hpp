#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>

#include "error.hpp"

namespace ra_ner::binary {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

/// Little-endian append-only encoder.
class Writer {
  public:
    void bytes(std::string_view s) { m_buf.append(s); }

    template <typename T>
    void uint(T v)
    {
        static_assert(std::is_unsigned_v<T>);
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            m_buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
        }
    }

    void u8(std::uint8_t v) { uint(v); }
    void u32(std::uint32_t v) { uint(v); }
    void u64(std::uint64_t v) { uint(v); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

    /// u32 byte length followed by the UTF-8 bytes.
    void str(std::string_view s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s);
    }

    std::string const& data() const noexcept { return m_buf; }
    std::string release() noexcept { return std::move(m_buf); }

  private:
    std::string m_buf;
};

class Reader {
  public:
    explicit Reader(std::string_view data) : m_data(data) {}

    std::string_view bytes(std::size_t n)
    {
        need(n);
        auto out = m_data.substr(m_pos, n);
        m_pos += n;
        return out;
    }

    template <typename T>
    T uint()
    {
        need(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(static_cast<unsigned char>(m_data[m_pos + i])) << (8 * i);
        }
        m_pos += sizeof(T);
        return v;
    }

    std::uint8_t u8() { return uint<std::uint8_t>(); }
    std::uint32_t u32() { return uint<std::uint32_t>(); }
    std::uint64_t u64() { return uint<std::uint64_t>(); }
    double f64() { return std::bit_cast<double>(u64()); }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str() { return std::string(bytes(u32())); }

    void expect_magic(std::string_view magic)
    {
        if (m_data.size() - m_pos < magic.size() || bytes(magic.size()) != magic) {
            throw format_error("bad magic: expected " + std::string(magic));
        }
    }

    bool at_end() const noexcept { return m_pos == m_data.size(); }
    std::size_t remaining() const noexcept { return m_data.size() - m_pos; }

  private:
    void need(std::size_t n) const
    {
        if (m_data.size() - m_pos < n) {
            throw format_error("truncated input at byte " + std::to_string(m_pos));
        }
    }

    std::string_view m_data;
    std::size_t m_pos = 0;
};

inline std::string read_file(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw error("cannot open " + path);
    }
    return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(std::string const& path, std::string_view data)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw error("cannot write " + path);
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) {
        throw error("write failed: " + path);
    }
}

}  // namespace ra_ner::binary
