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

#include <cstdint>
#include <string>
#include <string_view>

namespace hcs {

// Seconds since the Unix epoch, UTC. Fractional seconds are truncated on
// parse; offsets are normalized to UTC.
using UnixSeconds = std::int64_t;

std::int64_t days_from_civil(int y, unsigned m, unsigned d);
void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d);

// Parses an RFC 3339 timestamp such as "2017-03-01T12:00:00Z" or
// "2017-03-01T13:30:00+01:30". Throws Error(Format) on malformed input.
UnixSeconds parse_rfc3339(std::string_view s);

// Formats as "YYYY-MM-DDThh:mm:ssZ".
std::string format_rfc3339(UnixSeconds t);

// UTC calendar month key, "YYYY-MM".
std::string month_key(UnixSeconds t);

// The month key immediately after the given one ("2017-12" -> "2018-01").
std::string next_month_key(const std::string& key);

} // namespace hcs
