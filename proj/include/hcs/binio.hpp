/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Little-endian binary readers/writers used by the model and expert
// container formats. Byte order is explicit so files are portable.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "hcs/error.hpp"

namespace hcs::binio {

inline void write_u8(std::ostream& os, std::uint8_t v) {
    os.put(static_cast<char>(v));
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

inline void write_f32(std::ostream& os, float v) {
    write_u32(os, std::bit_cast<std::uint32_t>(v));
}

inline void write_f64(std::ostream& os, double v) {
    write_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline void write_string(std::ostream& os, const std::string& s) {
    write_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void write_f32_array(std::ostream& os, const std::vector<float>& v) {
    write_u64(os, v.size());
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(float)));
    } else {
        for (float f : v) write_f32(os, f);
    }
}

inline void write_f64_array(std::ostream& os, const std::vector<double>& v) {
    write_u64(os, v.size());
    for (double d : v) write_f64(os, d);
}

inline std::uint8_t read_u8(std::istream& is) {
    int c = is.get();
    if (c == EOF) fail(ErrorCode::Format, "unexpected end of stream");
    return static_cast<std::uint8_t>(c);
}

inline std::uint32_t read_u32(std::istream& is) {
    char b[4];
    if (!is.read(b, 4)) fail(ErrorCode::Format, "unexpected end of stream");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

inline std::uint64_t read_u64(std::istream& is) {
    char b[8];
    if (!is.read(b, 8)) fail(ErrorCode::Format, "unexpected end of stream");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

inline float read_f32(std::istream& is) {
    return std::bit_cast<float>(read_u32(is));
}

inline double read_f64(std::istream& is) {
    return std::bit_cast<double>(read_u64(is));
}

inline std::string read_string(std::istream& is) {
    std::uint32_t n = read_u32(is);
    std::string s(n, '\0');
    if (n > 0 && !is.read(s.data(), n))
        fail(ErrorCode::Format, "unexpected end of stream");
    return s;
}

inline std::vector<double> read_f64_array(std::istream& is) {
    const std::uint64_t n = read_u64(is);
    std::vector<double> v(n);
    for (auto& d : v) d = read_f64(is);
    return v;
}

inline std::vector<float> read_f32_array(std::istream& is) {
    std::uint64_t n = read_u64(is);
    std::vector<float> v(n);
    if constexpr (std::endian::native == std::endian::little) {
        if (n > 0 && !is.read(reinterpret_cast<char*>(v.data()),
                              static_cast<std::streamsize>(n * sizeof(float))))
            fail(ErrorCode::Format, "unexpected end of stream");
    } else {
        for (auto& f : v) f = read_f32(is);
    }
    return v;
}

} // namespace hcs::binio
