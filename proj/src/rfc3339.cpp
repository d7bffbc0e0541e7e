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

#include "hcs/rfc3339.hpp"

#include <cstdio>

#include "hcs/error.hpp"

namespace hcs {

namespace {

// Howard Hinnant's civil-date algorithms.
constexpr std::int64_t kDaysPerEra = 146097;

bool all_digits(std::string_view s) {
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return !s.empty();
}

int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

bool is_leap(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

unsigned days_in_month(int y, unsigned m) {
    static const unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return lengths[m - 1];
}

[[noreturn]] void bad(std::string_view s, const char* why) {
    fail(ErrorCode::Format,
         "invalid RFC 3339 timestamp \"" + std::string(s) + "\": " + why);
}

} // namespace

std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * kDaysPerEra + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - (kDaysPerEra - 1)) / kDaysPerEra;
    const unsigned doe = static_cast<unsigned>(z - era * kDaysPerEra);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int yr = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = yr + (m <= 2);
}

UnixSeconds parse_rfc3339(std::string_view s) {
    // Minimum form: YYYY-MM-DDThh:mm:ssZ (20 chars).
    if (s.size() < 20) bad(s, "too short");
    if (s[4] != '-' || s[7] != '-') bad(s, "expected date separators");
    char tsep = s[10];
    if (tsep != 'T' && tsep != 't' && tsep != ' ') bad(s, "expected 'T' separator");
    if (s[13] != ':' || s[16] != ':') bad(s, "expected time separators");

    auto year_s = s.substr(0, 4);
    auto mon_s = s.substr(5, 2);
    auto day_s = s.substr(8, 2);
    auto hour_s = s.substr(11, 2);
    auto min_s = s.substr(14, 2);
    auto sec_s = s.substr(17, 2);
    for (auto part : {year_s, mon_s, day_s, hour_s, min_s, sec_s})
        if (!all_digits(part)) bad(s, "expected digits");

    int year = to_int(year_s);
    unsigned mon = static_cast<unsigned>(to_int(mon_s));
    unsigned day = static_cast<unsigned>(to_int(day_s));
    int hour = to_int(hour_s);
    int min = to_int(min_s);
    int sec = to_int(sec_s);

    if (mon < 1 || mon > 12) bad(s, "month out of range");
    if (day < 1 || day > days_in_month(year, mon)) bad(s, "day out of range");
    if (hour > 23) bad(s, "hour out of range");
    if (min > 59) bad(s, "minute out of range");
    // Accept 60 for leap seconds, clamping to 59.
    if (sec > 60) bad(s, "second out of range");
    if (sec == 60) sec = 59;

    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t frac_begin = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == frac_begin) bad(s, "empty fractional seconds");
    }

    if (pos >= s.size()) bad(s, "missing offset");
    std::int64_t offset_sec = 0;
    char oc = s[pos];
    if (oc == 'Z' || oc == 'z') {
        ++pos;
    } else if (oc == '+' || oc == '-') {
        if (pos + 6 > s.size()) bad(s, "truncated offset");
        auto oh_s = s.substr(pos + 1, 2);
        auto om_s = s.substr(pos + 4, 2);
        if (s[pos + 3] != ':' || !all_digits(oh_s) || !all_digits(om_s))
            bad(s, "malformed offset");
        int oh = to_int(oh_s);
        int om = to_int(om_s);
        if (oh > 23 || om > 59) bad(s, "offset out of range");
        offset_sec = static_cast<std::int64_t>(oh) * 3600 + om * 60;
        if (oc == '-') offset_sec = -offset_sec;
        pos += 6;
    } else {
        bad(s, "expected 'Z' or numeric offset");
    }
    if (pos != s.size()) bad(s, "trailing characters");

    std::int64_t days = days_from_civil(year, mon, day);
    std::int64_t local = days * 86400 + hour * 3600 + min * 60 + sec;
    return local - offset_sec;
}

std::string format_rfc3339(UnixSeconds t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    int hour = static_cast<int>(rem / 3600);
    int min = static_cast<int>((rem % 3600) / 60);
    int sec = static_cast<int>(rem % 60);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", y, m, d,
                  hour, min, sec);
    return buf;
}

std::string month_key(UnixSeconds t) {
    std::int64_t days = t / 86400;
    if (t % 86400 < 0) days -= 1;
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[12];
    std::snprintf(buf, sizeof(buf), "%04d-%02u", y, m);
    return buf;
}

std::string next_month_key(const std::string& key) {
    if (key.size() != 7 || key[4] != '-' || !all_digits(key.substr(0, 4)) ||
        !all_digits(key.substr(5, 2)))
        fail(ErrorCode::Format, "invalid month key \"" + key + "\"");
    int y = to_int(std::string_view(key).substr(0, 4));
    int m = to_int(std::string_view(key).substr(5, 2));
    if (m < 1 || m > 12) fail(ErrorCode::Format, "invalid month key \"" + key + "\"");
    if (++m > 12) {
        m = 1;
        ++y;
    }
    char buf[12];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", y, m);
    return buf;
}

} // namespace hcs
