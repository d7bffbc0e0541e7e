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

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "hcs/binio.hpp"
#include "hcs/error.hpp"
#include "hcs/random.hpp"
#include "hcs/rfc3339.hpp"
#include "helpers.hpp"

using hcs::ErrorCode;
using hcstest::error_code_of;

TEST_SUITE("rfc3339") {

TEST_CASE("parse matches independent references") {
    CHECK(hcs::parse_rfc3339("1970-01-01T00:00:00Z") == 0);
    CHECK(hcs::parse_rfc3339("1970-01-02T00:00:00Z") == 86400);
    CHECK(hcs::parse_rfc3339("2017-03-01T12:00:00Z") == 1488369600);
    CHECK(hcs::parse_rfc3339("2018-06-15T23:59:59Z") == 1529107199);
    CHECK(hcs::parse_rfc3339("2016-02-29T00:00:00Z") == 1456704000);
    CHECK(hcs::parse_rfc3339("1999-12-31T23:59:59Z") == 946684799);
    CHECK(hcs::parse_rfc3339("2038-01-19T03:14:07Z") == 2147483647);
}

TEST_CASE("offsets normalize to UTC and fractions truncate") {
    CHECK(hcs::parse_rfc3339("2017-03-01T13:30:00+01:30") == 1488369600);
    CHECK(hcs::parse_rfc3339("2017-03-01T10:30:00-01:30") == 1488369600);
    CHECK(hcs::parse_rfc3339("2017-03-01T12:00:00.750Z") == 1488369600);
    CHECK(hcs::parse_rfc3339("2017-03-01t12:00:00z") == 1488369600);
}

TEST_CASE("format and parse round-trip") {
    CHECK(hcs::format_rfc3339(0) == "1970-01-01T00:00:00Z");
    CHECK(hcs::format_rfc3339(1488369600) == "2017-03-01T12:00:00Z");
    hcs::Rng rng(99);
    for (int i = 0; i < 2000; ++i) {
        const auto t = static_cast<hcs::UnixSeconds>(rng.below(4102444800ull));
        CHECK(hcs::parse_rfc3339(hcs::format_rfc3339(t)) == t);
    }
}

TEST_CASE("malformed timestamps are format errors") {
    for (const char* bad :
         {"", "2017-03-01", "2017/03/01T12:00:00Z", "2017-13-01T00:00:00Z",
          "2017-00-10T00:00:00Z", "2017-02-29T00:00:00Z", "2017-04-31T00:00:00Z",
          "2017-03-01T24:00:00Z", "2017-03-01T12:61:00Z", "2017-03-01T12:00:00",
          "2017-03-01T12:00:00Zx", "17-03-01T12:00:00Z", "2017-03-01T12:00:00+25:00"})
        CHECK(error_code_of([&] { hcs::parse_rfc3339(bad); }) == ErrorCode::Format);
}

TEST_CASE("month keys advance across year boundaries") {
    CHECK(hcs::month_key(hcs::parse_rfc3339("2017-12-31T23:59:59Z")) == "2017-12");
    CHECK(hcs::month_key(hcs::parse_rfc3339("2018-01-01T00:00:00Z")) == "2018-01");
    CHECK(hcs::next_month_key("2017-12") == "2018-01");
    CHECK(hcs::next_month_key("2018-01") == "2018-02");
    CHECK(hcs::next_month_key("2018-11") == "2018-12");
}

TEST_CASE("civil day conversions invert each other") {
    CHECK(hcs::days_from_civil(1970, 1, 1) == 0);
    hcs::Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const auto z = static_cast<std::int64_t>(rng.below(80000)) - 20000;
        int y;
        unsigned m, d;
        hcs::civil_from_days(z, y, m, d);
        CHECK(hcs::days_from_civil(y, m, d) == z);
        CHECK(m >= 1);
        CHECK(m <= 12);
        CHECK(d >= 1);
        CHECK(d <= 31);
    }
}

} // TEST_SUITE

TEST_SUITE("binio") {

TEST_CASE("scalar round-trips are exact") {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    hcs::binio::write_u8(ss, 0xab);
    hcs::binio::write_u32(ss, 0xdeadbeefu);
    hcs::binio::write_u64(ss, 0x0123456789abcdefull);
    hcs::binio::write_f32(ss, 1.5f);
    hcs::binio::write_f64(ss, -0.1);
    hcs::binio::write_string(ss, "grüße");
    CHECK(hcs::binio::read_u8(ss) == 0xab);
    CHECK(hcs::binio::read_u32(ss) == 0xdeadbeefu);
    CHECK(hcs::binio::read_u64(ss) == 0x0123456789abcdefull);
    CHECK(hcs::binio::read_f32(ss) == 1.5f);
    CHECK(hcs::binio::read_f64(ss) == -0.1);
    CHECK(hcs::binio::read_string(ss) == "grüße");
}

TEST_CASE("arrays round-trip bit-exactly including special values") {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    const std::vector<float> f{0.0f, -0.0f, 1e-38f, std::numeric_limits<float>::max(),
                               std::numeric_limits<float>::infinity(), 0.1f};
    const std::vector<double> d{0.0, -1e300, 1e-300, 0.1};
    hcs::binio::write_f32_array(ss, f);
    hcs::binio::write_f64_array(ss, d);
    const auto f2 = hcs::binio::read_f32_array(ss);
    const auto d2 = hcs::binio::read_f64_array(ss);
    REQUIRE(f2.size() == f.size());
    REQUIRE(d2.size() == d.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(std::bit_cast<std::uint32_t>(f2[i]) == std::bit_cast<std::uint32_t>(f[i]));
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK(std::bit_cast<std::uint64_t>(d2[i]) == std::bit_cast<std::uint64_t>(d[i]));
}

TEST_CASE("little-endian layout is pinned") {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    hcs::binio::write_u32(ss, 0x01020304u);
    const std::string bytes = ss.str();
    REQUIRE(bytes.size() == 4);
    CHECK(static_cast<unsigned char>(bytes[0]) == 0x04);
    CHECK(static_cast<unsigned char>(bytes[3]) == 0x01);
}

TEST_CASE("truncated streams are format errors") {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    hcs::binio::write_u32(ss, 7);
    ss.seekg(0);
    CHECK(error_code_of([&] {
              hcs::binio::read_u64(ss);
          }) == ErrorCode::Format);
    std::stringstream empty(std::ios::in | std::ios::out | std::ios::binary);
    CHECK(error_code_of([&] { hcs::binio::read_u8(empty); }) == ErrorCode::Format);
}

} // TEST_SUITE

TEST_SUITE("random") {

TEST_CASE("derive_seed is stable and spreads indices") {
    CHECK(hcs::derive_seed(1, 0) == hcs::derive_seed(1, 0));
    CHECK(hcs::derive_seed(1, 0) != hcs::derive_seed(1, 1));
    CHECK(hcs::derive_seed(1, 0) != hcs::derive_seed(2, 0));
}

TEST_CASE("fnv1a64 matches published vectors") {
    CHECK(hcs::fnv1a64("") == 14695981039346656037ull);
    CHECK(hcs::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(hcs::fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("rng streams are reproducible and in range") {
    hcs::Rng a(42), b(42), c(43);
    bool same_seed_equal = true;
    bool other_seed_differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        if (x != b.next_u64()) same_seed_equal = false;
        if (x != c.next_u64()) other_seed_differs = true;
    }
    CHECK(same_seed_equal);
    CHECK(other_seed_differs);
    hcs::Rng r(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r.below(10) < 10);
    }
}

} // TEST_SUITE
