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

#include "hcs/text_prep.hpp"

#include <algorithm>
#include <fstream>

#include "hcs/error.hpp"

namespace hcs {

namespace {

// Decodes one UTF-8 code point starting at i, advancing i. Invalid bytes
// decode to U+FFFD, which the punctuation filter later removes.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len;
    char32_t cp;
    if ((b0 & 0xe0) == 0xc0) {
        len = 2;
        cp = b0 & 0x1f;
    } else if ((b0 & 0xf0) == 0xe0) {
        len = 3;
        cp = b0 & 0x0f;
    } else if ((b0 & 0xf8) == 0xf0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + static_cast<std::size_t>(len) > s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
        if ((b & 0xc0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (b & 0x3f);
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

// Covers ASCII, Latin-1 and Latin Extended-A, which is all the corpus needs.
char32_t to_lower_cp(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 32;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    if (cp == 0x178) return 0xFF;
    if (cp >= 0x100 && cp <= 0x137 && cp % 2 == 0) return cp + 1;
    if (cp >= 0x139 && cp <= 0x148 && cp % 2 == 1) return cp + 1;
    if (cp >= 0x14A && cp <= 0x177 && cp % 2 == 0) return cp + 1;
    if (cp == 0x179 || cp == 0x17B || cp == 0x17D) return cp + 1;
    return cp;
}

bool is_space_cp(char32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Punctuation: ASCII non-alphanumerics, Latin-1 punctuation, the General
// Punctuation block, the replacement character. Letters with diacritics
// (umlauts, ß) are not punctuation and survive.
bool is_punct_cp(char32_t cp) {
    if (cp < 0x80)
        return !((cp >= U'0' && cp <= U'9') || (cp >= U'a' && cp <= U'z') ||
                 (cp >= U'A' && cp <= U'Z'));
    switch (cp) {
        case 0xA1: case 0xA7: case 0xAB: case 0xAD: case 0xB6: case 0xB7:
        case 0xBB: case 0xBF: case 0xFFFD:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x206F;
    }
}

bool starts_with_ascii(const std::u32string& t, std::size_t pos, std::string_view prefix) {
    if (t.size() - pos < prefix.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k)
        if (t[pos + k] != static_cast<char32_t>(prefix[k])) return false;
    return true;
}

std::string lower_utf8(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) append_utf8(out, to_lower_cp(decode_utf8(s, i)));
    return out;
}

bool has_whitespace(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size())
        if (is_space_cp(decode_utf8(s, i))) return true;
    return false;
}

std::set<std::string> read_stoplist_words(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open stop list file: " + path);
    std::set<std::string> words;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
            line.erase(0, 3);
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t");
        line = line.substr(first, last - first + 1);
        if (line[0] == '#') continue;
        if (has_whitespace(line))
            fail(ErrorCode::Format, "stop list " + path + " line " +
                                        std::to_string(lineno) +
                                        " contains internal whitespace: \"" + line + "\"");
        words.insert(lower_utf8(line));
    }
    return words;
}

constexpr const char* kLightWords[] = {
    "als",    "also",   "am",      "an",      "auf",     "aus",
    "bei",    "bis",    "da",      "damit",   "dann",    "das",
    "daß",    "dass",   "dem",     "den",     "der",     "des",
    "die",    "dies",   "ein",     "eine",    "einem",   "einen",
    "einer",  "eines",  "einige",  "einigem", "einigen", "einiger",
    "einiges", "es",    "im",      "in",      "ins",     "ob",
    "oder",   "so",     "sondern", "um",      "und",     "unter",
    "vom",    "von",    "vor",     "zu",      "zum",     "zur",
};
static_assert(sizeof(kLightWords) / sizeof(kLightWords[0]) == 48);

} // namespace

std::string stop_level_name(StopLevel level) {
    switch (level) {
        case StopLevel::None: return "none";
        case StopLevel::Light: return "light";
        case StopLevel::Heavy: return "heavy";
        case StopLevel::Custom: return "custom";
    }
    fail(ErrorCode::Config, "unknown stop level");
}

StopLevel stop_level_from_name(std::string_view name) {
    if (name == "none") return StopLevel::None;
    if (name == "light") return StopLevel::Light;
    if (name == "heavy") return StopLevel::Heavy;
    if (name == "custom") return StopLevel::Custom;
    fail(ErrorCode::Config, "unknown stop level \"" + std::string(name) +
                                "\" (expected none, light, heavy or custom)");
}

StopList StopList::none() {
    return StopList(StopLevel::None, {}, "");
}

StopList StopList::light() {
    std::set<std::string> words;
    for (const char* w : kLightWords) words.insert(w);
    return StopList(StopLevel::Light, std::move(words), "");
}

StopList StopList::heavy(const std::string& path) {
    auto words = read_stoplist_words(path);
    for (const char* w : kLightWords)
        if (!words.count(w))
            fail(ErrorCode::Config, "heavy stop list " + path +
                                        " is missing light-list word \"" +
                                        std::string(w) + "\"");
    return StopList(StopLevel::Heavy, std::move(words), path);
}

StopList StopList::from_words(StopLevel level, std::vector<std::string> in) {
    std::set<std::string> words;
    for (auto& w : in) {
        if (w.empty()) fail(ErrorCode::Format, "stop list entry is empty");
        if (has_whitespace(w))
            fail(ErrorCode::Format, "stop list entry contains whitespace: \"" + w + "\"");
        words.insert(lower_utf8(w));
    }
    return StopList(level, std::move(words), "");
}

bool StopList::contains(std::string_view token) const {
    if (words_.empty()) return false;
    return words_.count(std::string(token)) != 0;
}

StopList load_stoplist(const std::string& path) {
    return StopList(StopLevel::Custom, read_stoplist_words(path), path);
}

StopList resolve_stoplist(StopLevel level, const std::string& stoplist_dir) {
    switch (level) {
        case StopLevel::None: return StopList::none();
        case StopLevel::Light: return StopList::light();
        case StopLevel::Heavy: return StopList::heavy(stoplist_dir + "/heavy.txt");
        case StopLevel::Custom:
            fail(ErrorCode::Config, "custom stop level requires an explicit file path");
    }
    fail(ErrorCode::Config, "unknown stop level");
}

TokenSeq normalize(std::string_view text) {
    std::vector<std::u32string> raw;
    {
        std::u32string cur;
        std::size_t i = 0;
        while (i < text.size()) {
            const char32_t cp = to_lower_cp(decode_utf8(text, i));
            if (is_space_cp(cp)) {
                if (!cur.empty()) {
                    raw.push_back(std::move(cur));
                    cur.clear();
                }
            } else {
                cur.push_back(cp);
            }
        }
        if (!cur.empty()) raw.push_back(std::move(cur));
    }

    // Leading retweet marker: "rt:...", or bare "rt" followed by a mention.
    std::size_t begin = 0;
    if (!raw.empty()) {
        if (starts_with_ascii(raw[0], 0, "rt:")) {
            raw[0].erase(0, 3);
            if (raw[0].empty()) begin = 1;
        } else if (raw[0] == U"rt" && raw.size() > 1 && !raw[1].empty() &&
                   raw[1][0] == U'@') {
            begin = 1;
        }
    }

    TokenSeq out;
    out.reserve(raw.size());
    for (std::size_t t = begin; t < raw.size(); ++t) {
        const std::u32string& tok = raw[t];
        // First significant position: skip punctuation, but stop at a
        // mention or hashtag sigil so ".@user" is still dropped whole.
        std::size_t pos = 0;
        while (pos < tok.size() && is_punct_cp(tok[pos]) && tok[pos] != U'@' &&
               tok[pos] != U'#')
            ++pos;
        if (pos == tok.size()) continue;
        if (tok[pos] == U'@' || tok[pos] == U'#') continue;
        if (starts_with_ascii(tok, pos, "http://") ||
            starts_with_ascii(tok, pos, "https://") ||
            starts_with_ascii(tok, pos, "www."))
            continue;
        std::string kept;
        for (const char32_t cp : tok)
            if (!is_punct_cp(cp)) append_utf8(kept, cp);
        if (!kept.empty()) out.push_back(std::move(kept));
    }
    return out;
}

TokenSeq remove_stopwords(const TokenSeq& tokens, const StopList& list) {
    TokenSeq out;
    out.reserve(tokens.size());
    for (const auto& t : tokens)
        if (!list.contains(t)) out.push_back(t);
    return out;
}

std::string join_tokens(const TokenSeq& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

} // namespace hcs
