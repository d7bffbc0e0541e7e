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

#include <stdexcept>
#include <string>

namespace hcs {

// Error classes map 1:1 onto CLI exit codes (see README).
enum class ErrorCode {
    Config = 2,
    Io = 3,
    Format = 4,
    Capacity = 5,
    Numeric = 6,
    Shape = 7,
    Label = 8,
    Structural = 9,
    Unscorable = 10,
    EmptyResult = 11,
    UndefinedMetric = 12,
    Duplicate = 13,
    Parse = 14,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

} // namespace hcs
